/// Relative tolerance below which a computed eigenvalue counts as a match.
/// Coarse meshes still resolve degenerate clusters at this level.
pub const DEFAULT_MATCH_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub computed: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

/// Outcome of matching a computed spectrum against exact values. Every
/// computed value is either matched or spurious.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    pub matched: Vec<MatchedPair>,
    pub spurious: Vec<f64>,
    pub missed: Vec<f64>,
    pub tolerance: f64,
}

impl SpectrumComparison {
    pub fn max_rel_error(&self) -> f64 {
        self.matched.iter().fold(0.0, |m, p| m.max(p.rel_error))
    }

    /// Spurious values below the smallest exact one.
    pub fn spurious_below(&self, value: f64) -> usize {
        self.spurious.iter().filter(|&&s| s < value).count()
    }
}

/// Greedy matching in ascending order: each computed value takes the
/// nearest unused exact value within `tol_rel`.
pub fn compare_spectrum(computed: &[f64], oracle: &[f64], tol_rel: f64) -> SpectrumComparison {
    let mut computed = computed.to_vec();
    computed.sort_by(f64::total_cmp);
    let mut exact = oracle.to_vec();
    exact.sort_by(f64::total_cmp);
    let mut used = vec![false; exact.len()];
    let mut matched = Vec::new();
    let mut spurious = Vec::new();
    for &c in &computed {
        let best = exact
            .iter()
            .enumerate()
            .filter(|&(j, &o)| !used[j] && (c - o).abs() <= tol_rel * o.abs())
            .min_by(|a, b| (c - a.1).abs().total_cmp(&(c - b.1).abs()));
        match best {
            Some((j, &o)) => {
                used[j] = true;
                matched.push(MatchedPair { computed: c, oracle: o, rel_error: (c - o).abs() / o.abs() });
            }
            None => spurious.push(c),
        }
    }
    let missed = exact.iter().zip(&used).filter(|(_, &u)| !u).map(|(&o, _)| o).collect();
    SpectrumComparison { matched, spurious, missed, tolerance: tol_rel }
}
