//! Input parsing and the pairing of trees with alignments.

pub mod dates;
pub mod fasta;
pub mod newick;

use crate::error::{Error, Result};
use crate::tree::TimeTree;
use fasta::{Alignment, MISSING};

/// Compressed site patterns in tip-id order.
///
/// `codes` is pattern-major: pattern `p` occupies
/// `codes[p * n_tips .. (p + 1) * n_tips]`, one state code per tip.
/// Patterns are stored in first-occurrence order, so compression is
/// deterministic for a given alignment.
#[derive(Debug, Clone)]
pub struct SitePatterns {
    pub n_tips: usize,
    pub n_states: usize,
    pub codes: Vec<u8>,
    /// Multiplicity of each pattern; sums to the original site count.
    pub weights: Vec<f64>,
    pub original_sites: usize,
}

impl SitePatterns {
    pub fn n_patterns(&self) -> usize {
        self.weights.len()
    }

    pub fn tip_code(&self, pattern: usize, tip: usize) -> u8 {
        self.codes[pattern * self.n_tips + tip]
    }

    fn from_columns(columns: Vec<Vec<u8>>, n_tips: usize, n_states: usize) -> Self {
        let original_sites = columns.len();
        let mut index: std::collections::HashMap<Vec<u8>, usize> = std::collections::HashMap::new();
        let mut codes: Vec<u8> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for col in columns {
            match index.get(&col) {
                Some(&p) => weights[p] += 1.0,
                None => {
                    index.insert(col.clone(), weights.len());
                    codes.extend_from_slice(&col);
                    weights.push(1.0);
                }
            }
        }
        Self {
            n_tips,
            n_states,
            codes,
            weights,
            original_sites,
        }
    }
}

/// A tree paired with its alignment, rows permuted into tip-id order and
/// sites compressed into patterns.
#[derive(Debug, Clone)]
pub struct BoundData {
    pub tree: TimeTree,
    pub patterns: SitePatterns,
    /// `row_to_tip[r]` is the tip id of alignment row `r`.
    pub row_to_tip: Vec<usize>,
}

/// Pair a tree with an alignment. The taxon sets must be equal; the error
/// lists the symmetric difference otherwise. The resulting permutation is a
/// pure function of the inputs.
pub fn bind(tree: TimeTree, aln: &Alignment) -> Result<BoundData> {
    let n_tips = tree.n_tips();
    let mut row_of_tip: Vec<Option<usize>> = vec![None; n_tips];
    let mut row_to_tip: Vec<usize> = vec![usize::MAX; aln.n_taxa()];
    let mut missing_from_tree: Vec<String> = Vec::new();

    for (row, name) in aln.taxa().iter().enumerate() {
        match (0..n_tips).find(|&t| tree.tip_label(t) == name) {
            Some(tip) => {
                row_of_tip[tip] = Some(row);
                row_to_tip[row] = tip;
            }
            None => missing_from_tree.push(name.clone()),
        }
    }
    let missing_from_alignment: Vec<String> = (0..n_tips)
        .filter(|&t| row_of_tip[t].is_none())
        .map(|t| tree.tip_label(t).to_string())
        .collect();
    if !missing_from_tree.is_empty() || !missing_from_alignment.is_empty() {
        return Err(Error::TaxonMismatch {
            missing_from_alignment,
            missing_from_tree,
        });
    }

    let columns: Vec<Vec<u8>> = (0..aln.n_sites())
        .map(|site| {
            (0..n_tips)
                .map(|tip| aln.code(row_of_tip[tip].unwrap(), site))
                .collect()
        })
        .collect();
    let patterns = SitePatterns::from_columns(columns, n_tips, aln.n_states());

    Ok(BoundData {
        tree,
        patterns,
        row_to_tip,
    })
}

/// True when every character of every pattern is missing for the given tip.
pub fn tip_is_all_missing(patterns: &SitePatterns, tip: usize) -> bool {
    (0..patterns.n_patterns()).all(|p| patterns.tip_code(p, tip) == MISSING)
}
