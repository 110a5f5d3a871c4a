//! FASTA parsing and writing with a pluggable character alphabet.
//!
//! Only the DNA alphabet ships. Ambiguity codes, gaps, and '?' collapse to
//! [`MISSING`], which the likelihood treats as a fully marginalized state.

use crate::error::{Error, Result};

/// Sentinel state code for missing or ambiguous characters.
pub const MISSING: u8 = u8::MAX;

/// A character state space mapping residues to codes `0..size`.
#[derive(Debug, Clone)]
pub struct Alphabet {
    name: &'static str,
    size: usize,
    /// code_of[byte] = state code, MISSING, or INVALID.
    code_of: [u8; 256],
    symbols: Vec<u8>,
}

const INVALID: u8 = u8::MAX - 1;

impl Alphabet {
    /// Nucleotide alphabet: A=0, C=1, G=2, T=3; IUPAC ambiguity codes,
    /// '-', '?', and 'N' map to [`MISSING`]; lowercase accepted.
    pub fn dna() -> Self {
        let mut code_of = [INVALID; 256];
        for (i, &b) in b"ACGT".iter().enumerate() {
            code_of[b as usize] = i as u8;
            code_of[b.to_ascii_lowercase() as usize] = i as u8;
        }
        for &b in b"RYSWKMBDHVN-?" {
            code_of[b as usize] = MISSING;
            code_of[b.to_ascii_lowercase() as usize] = MISSING;
        }
        Self {
            name: "dna",
            size: 4,
            code_of,
            symbols: b"ACGT".to_vec(),
        }
    }

    /// Build a custom alphabet from single-byte symbols, with an extra set of
    /// bytes that should be read as missing data.
    pub fn custom(name: &'static str, symbols: &[u8], missing: &[u8]) -> Self {
        let mut code_of = [INVALID; 256];
        for (i, &b) in symbols.iter().enumerate() {
            code_of[b as usize] = i as u8;
            code_of[b.to_ascii_lowercase() as usize] = i as u8;
        }
        for &b in missing {
            code_of[b as usize] = MISSING;
        }
        Self {
            name,
            size: symbols.len(),
            code_of,
            symbols: symbols.to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Number of character states, `S`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encode(&self, byte: u8) -> Option<u8> {
        match self.code_of[byte as usize] {
            INVALID => None,
            code => Some(code),
        }
    }

    pub fn symbol(&self, code: u8) -> u8 {
        if code == MISSING {
            b'?'
        } else {
            self.symbols[code as usize]
        }
    }
}

/// A tip-indexed character matrix over `states` states.
#[derive(Debug, Clone)]
pub struct Alignment {
    taxa: Vec<String>,
    states: usize,
    sites: usize,
    /// Row-per-taxon codes in `{0..states-1} ∪ {MISSING}`.
    data: Vec<Vec<u8>>,
}

impl Alignment {
    pub fn new(taxa: Vec<String>, states: usize, data: Vec<Vec<u8>>) -> Result<Self> {
        if taxa.len() != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} taxa but {} sequence rows",
                taxa.len(),
                data.len()
            )));
        }
        let sites = data.first().map_or(0, |r| r.len());
        if sites == 0 {
            return Err(Error::InvalidParameter("alignment has zero sites".into()));
        }
        for (i, row) in data.iter().enumerate() {
            if row.len() != sites {
                return Err(Error::DimensionMismatch(format!(
                    "sequence '{}' has {} sites, expected {sites}",
                    taxa[i],
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&c| c != MISSING && c as usize >= states) {
                return Err(Error::InvalidParameter(format!(
                    "sequence '{}' contains out-of-range code {bad}",
                    taxa[i]
                )));
            }
        }
        Ok(Self {
            taxa,
            states,
            sites,
            data,
        })
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    /// Number of aligned sites, `C`.
    pub fn n_sites(&self) -> usize {
        self.sites
    }

    pub fn n_states(&self) -> usize {
        self.states
    }

    pub fn row(&self, taxon: usize) -> &[u8] {
        &self.data[taxon]
    }

    pub fn code(&self, taxon: usize, site: usize) -> u8 {
        self.data[taxon][site]
    }

    /// Empirical state frequencies over non-missing cells, with a small
    /// pseudocount so no frequency is exactly zero.
    pub fn empirical_frequencies(&self) -> Vec<f64> {
        let mut counts = vec![1.0f64; self.states];
        for row in &self.data {
            for &c in row {
                if c != MISSING {
                    counts[c as usize] += 1.0;
                }
            }
        }
        let total: f64 = counts.iter().sum();
        counts.iter().map(|c| c / total).collect()
    }

    /// Concatenate the sites of two alignments over the same taxa.
    pub fn concat(&self, other: &Alignment) -> Result<Alignment> {
        if self.taxa != other.taxa || self.states != other.states {
            return Err(Error::DimensionMismatch(
                "alignments differ in taxa or state space".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut row = a.clone();
                row.extend_from_slice(b);
                row
            })
            .collect();
        Alignment::new(self.taxa.clone(), self.states, data)
    }
}

/// Parse FASTA text. Lines starting with ';' or '#' are comments; lowercase
/// residues are accepted; sequences may wrap over multiple lines.
pub fn parse_fasta(text: &str, alphabet: &Alphabet) -> Result<Alignment> {
    let mut taxa: Vec<String> = Vec::new();
    let mut data: Vec<Vec<u8>> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim_end();
        if trimmed.is_empty() || trimmed.starts_with(';') || trimmed.starts_with('#') {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('>') {
            let name = header.split_whitespace().next().unwrap_or("").to_string();
            if name.is_empty() {
                return Err(Error::Fasta {
                    line: line_no,
                    message: "empty sequence name".into(),
                });
            }
            if taxa.contains(&name) {
                return Err(Error::Fasta {
                    line: line_no,
                    message: format!("duplicate taxon name '{name}'"),
                });
            }
            taxa.push(name);
            data.push(Vec::new());
        } else {
            let row = data.last_mut().ok_or_else(|| Error::Fasta {
                line: line_no,
                message: "sequence data before any '>' header".into(),
            })?;
            for &b in trimmed.as_bytes() {
                if b == b' ' || b == b'\t' {
                    continue;
                }
                match alphabet.encode(b) {
                    Some(code) => row.push(code),
                    None => {
                        return Err(Error::Fasta {
                            line: line_no,
                            message: format!(
                                "character '{}' outside the {} alphabet",
                                b as char,
                                alphabet.name()
                            ),
                        })
                    }
                }
            }
        }
    }

    if taxa.is_empty() {
        return Err(Error::Fasta {
            line: 1,
            message: "no sequences found".into(),
        });
    }
    let sites = data[0].len();
    for (i, row) in data.iter().enumerate() {
        if row.len() != sites {
            return Err(Error::Fasta {
                line: 1,
                message: format!(
                    "sequence '{}' has length {}, expected {sites}",
                    taxa[i],
                    row.len()
                ),
            });
        }
    }
    Alignment::new(taxa, alphabet.size(), data)
}

/// Write an alignment as FASTA, wrapping sequence lines at 60 columns.
/// Optional comment lines (without the leading ';') come first.
pub fn write_fasta(aln: &Alignment, alphabet: &Alphabet, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("; ");
        out.push_str(c);
        out.push('\n');
    }
    for (i, name) in aln.taxa().iter().enumerate() {
        out.push('>');
        out.push_str(name);
        out.push('\n');
        for chunk in aln.row(i).chunks(60) {
            for &code in chunk {
                out.push(alphabet.symbol(code) as char);
            }
            out.push('\n');
        }
    }
    out
}
