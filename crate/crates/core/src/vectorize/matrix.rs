//! Sparse feature matrix with column provenance.

use serde::{Deserialize, Serialize};

use super::{MetaDictionary, SparseVec, StructuredDictionary, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnOrigin {
    Term,
    Summarizing,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub origin: ColumnOrigin,
}

/// Row-major sparse matrix; stored entries are non-zero and column-sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rows: Vec<SparseVec>,
    pub columns: Vec<ColumnMeta>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &SparseVec {
        &self.rows[i]
    }

    /// Value at (row, col); zero when not stored.
    pub fn get(&self, row: usize, col: u32) -> f64 {
        match self.rows[row].binary_search_by_key(&col, |e| e.0) {
            Ok(i) => self.rows[row][i].1,
            Err(_) => 0.0,
        }
    }

    /// Matrix restricted to a subset of rows (in the given order).
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            columns: self.columns.clone(),
        }
    }
}

/// Everything needed to lay out one feature matrix.
pub struct AssembleInput<'a> {
    pub vocab: &'a Vocabulary,
    /// Per-child weighted term vectors over the full vocabulary.
    pub term_vectors: &'a [SparseVec],
    /// Frozen selector output (sorted vocabulary column indices); `None`
    /// keeps every vocabulary column.
    pub selected_terms: Option<&'a [usize]>,
    pub meta: Option<(&'a MetaDictionary, &'a [Vec<f64>])>,
    pub structured: Option<(&'a StructuredDictionary, &'a [Vec<f64>])>,
}

/// Assemble the final matrix with column order
/// [selected terms][summarizing][structured].
pub fn assemble(input: AssembleInput<'_>) -> FeatureMatrix {
    let n_rows = input.term_vectors.len();
    let mut columns: Vec<ColumnMeta> = Vec::new();

    let selected: Vec<usize> = match input.selected_terms {
        Some(sel) => sel.to_vec(),
        None => (0..input.vocab.len()).collect(),
    };
    for &term_col in &selected {
        columns.push(ColumnMeta {
            name: input.vocab.terms[term_col].clone(),
            origin: ColumnOrigin::Term,
        });
    }

    let meta_base = columns.len();
    if let Some((dict, rows)) = &input.meta {
        assert_eq!(rows.len(), n_rows, "one meta row per child");
        for name in dict.column_names() {
            columns.push(ColumnMeta {
                name,
                origin: ColumnOrigin::Summarizing,
            });
        }
    }
    let structured_base = columns.len();
    if let Some((dict, rows)) = &input.structured {
        assert_eq!(rows.len(), n_rows, "one structured row per child");
        for name in dict.column_names() {
            columns.push(ColumnMeta {
                name,
                origin: ColumnOrigin::Structured,
            });
        }
    }
    let n_cols = columns.len();

    let mut rows: Vec<SparseVec> = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let mut row: SparseVec = Vec::new();
        for &(col, w) in &input.term_vectors[i] {
            if let Ok(new_col) = selected.binary_search(&(col as usize)) {
                if w != 0.0 {
                    row.push((new_col as u32, w));
                }
            }
        }
        if let Some((_, meta_rows)) = &input.meta {
            for (j, &v) in meta_rows[i].iter().enumerate() {
                if v != 0.0 {
                    row.push(((meta_base + j) as u32, v));
                }
            }
        }
        if let Some((_, struct_rows)) = &input.structured {
            for (j, &v) in struct_rows[i].iter().enumerate() {
                if v != 0.0 {
                    row.push(((structured_base + j) as u32, v));
                }
            }
        }
        rows.push(row);
    }

    FeatureMatrix {
        n_rows,
        n_cols,
        rows,
        columns,
    }
}
