//! Group statistics over the per-run metrics: tie-corrected Kruskal-Wallis,
//! Dunn pairwise post-hoc comparisons with selectable multiplicity
//! adjustment, Pearson correlation, and sickness-questionnaire scoring.

pub mod special;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use special::{chi_square_sf, normal_sf, student_t_two_sided};

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

/// Average ranks (1-based) of the pooled observations; ties share the mean
/// of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0; // mean of ranks i+1 ..= j
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Sum of t^3 - t over tie groups of the pooled observations.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        sum += t * t * t - t;
        i = j;
    }
    sum
}

// ---------------------------------------------------------------------------
// Grouped samples
// ---------------------------------------------------------------------------

/// Environmental factor a sample is grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    LightLevel,
    Course,
    RunOrder,
}

impl Factor {
    pub fn as_str(self) -> &'static str {
        match self {
            Factor::LightLevel => "light_level",
            Factor::Course => "course",
            Factor::RunOrder => "run_order",
        }
    }
}

/// Observations of one variable split into labeled groups.
///
/// Group order is preserved; matrices produced downstream follow it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedSample {
    pub factor: Factor,
    pub groups: Vec<(String, Vec<f64>)>,
}

impl GroupedSample {
    pub fn new(factor: Factor, groups: Vec<(String, Vec<f64>)>) -> Result<GroupedSample> {
        let non_empty = groups.iter().filter(|(_, v)| !v.is_empty()).count();
        if non_empty < 2 {
            return Err(Error::Stats(format!(
                "need at least 2 non-empty groups, found {non_empty}"
            )));
        }
        if groups.iter().any(|(_, v)| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Stats("non-finite observation".into()));
        }
        Ok(GroupedSample { factor, groups })
    }

    /// Groups with at least one observation, in input order.
    fn occupied(&self) -> Vec<(&str, &[f64])> {
        self.groups
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(l, v)| (l.as_str(), v.as_slice()))
            .collect()
    }

    fn total_n(&self) -> usize {
        self.groups.iter().map(|(_, v)| v.len()).sum()
    }
}

// ---------------------------------------------------------------------------
// Kruskal-Wallis
// ---------------------------------------------------------------------------

/// Result of a Kruskal-Wallis rank test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KwResult {
    /// Tie-corrected H statistic.
    pub h_statistic: f64,
    pub df: usize,
    /// Upper-tail chi-square probability of H.
    pub p_value: f64,
}

/// Kruskal-Wallis H test across the groups of `g`, with average-rank tie
/// handling and the tie-correction divisor 1 - sum(t^3 - t) / (N^3 - N).
pub fn kruskal_wallis(g: &GroupedSample) -> Result<KwResult> {
    let groups = g.occupied();
    let k = groups.len();
    let n_total = g.total_n();
    if n_total < 3 {
        return Err(Error::Stats(format!(
            "kruskal-wallis needs at least 3 observations, found {n_total}"
        )));
    }

    let pooled: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let ranks = average_ranks(&pooled);

    let n = n_total as f64;
    let mut h = 0.0;
    let mut offset = 0;
    for (_, v) in &groups {
        let ni = v.len() as f64;
        let ri: f64 = ranks[offset..offset + v.len()].iter().sum();
        h += ri * ri / ni;
        offset += v.len();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    let correction = 1.0 - tie_term(&pooled) / (n * n * n - n);
    let df = k - 1;
    if correction <= 0.0 {
        // Every observation identical: no evidence against the null.
        return Ok(KwResult {
            h_statistic: 0.0,
            df,
            p_value: 1.0,
        });
    }
    let h = (h / correction).max(0.0);
    Ok(KwResult {
        h_statistic: h,
        df,
        p_value: chi_square_sf(h, df),
    })
}

// ---------------------------------------------------------------------------
// Dunn post-hoc
// ---------------------------------------------------------------------------

/// Multiplicity adjustment for the Dunn pairwise p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjustment {
    None,
    Bonferroni,
    Holm,
}

impl Adjustment {
    pub fn as_str(self) -> &'static str {
        match self {
            Adjustment::None => "none",
            Adjustment::Bonferroni => "bonferroni",
            Adjustment::Holm => "holm",
        }
    }
}

/// Symmetric matrix of pairwise adjusted p-values from a Dunn test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnMatrix {
    pub labels: Vec<String>,
    /// p[i][j] = adjusted p-value comparing group i with group j;
    /// diagonal fixed at 1.
    pub p: Vec<Vec<f64>>,
    pub adjustment: Adjustment,
}

impl DunnMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.p[i][j])
    }
}

/// Dunn pairwise mean-rank comparisons following a Kruskal-Wallis test.
///
/// Empty groups are excluded (they carry no rank information). The z
/// statistic uses the tie-corrected variance term
/// N(N+1)/12 - sum(t^3 - t) / (12(N-1)).
pub fn dunn_posthoc(g: &GroupedSample, adjustment: Adjustment) -> Result<DunnMatrix> {
    let groups = g.occupied();
    let k = groups.len();
    if k < 2 {
        return Err(Error::Stats("dunn test needs at least 2 groups".into()));
    }

    let pooled: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let ranks = average_ranks(&pooled);
    let n = pooled.len() as f64;

    let mut mean_rank = Vec::with_capacity(k);
    let mut sizes = Vec::with_capacity(k);
    let mut offset = 0;
    for (_, v) in &groups {
        let ni = v.len();
        let ri: f64 = ranks[offset..offset + ni].iter().sum();
        mean_rank.push(ri / ni as f64);
        sizes.push(ni as f64);
        offset += ni;
    }

    let variance_term = n * (n + 1.0) / 12.0 - tie_term(&pooled) / (12.0 * (n - 1.0));

    // Raw two-sided p per pair, row-major upper triangle.
    let mut raw = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let p = if variance_term <= 0.0 {
                1.0
            } else {
                let se = (variance_term * (1.0 / sizes[i] + 1.0 / sizes[j])).sqrt();
                let z = (mean_rank[i] - mean_rank[j]) / se;
                2.0 * normal_sf(z.abs())
            };
            raw.push(p);
        }
    }

    let adjusted = adjust_p_values(&raw, adjustment);

    let mut p = vec![vec![1.0; k]; k];
    let mut idx = 0;
    #[allow(clippy::needless_range_loop)]
    for i in 0..k {
        for j in (i + 1)..k {
            p[i][j] = adjusted[idx];
            p[j][i] = adjusted[idx];
            idx += 1;
        }
    }

    Ok(DunnMatrix {
        labels: groups.iter().map(|(l, _)| l.to_string()).collect(),
        p,
        adjustment,
    })
}

/// Applies a multiplicity adjustment to a family of p-values.
pub fn adjust_p_values(raw: &[f64], adjustment: Adjustment) -> Vec<f64> {
    let m = raw.len();
    match adjustment {
        Adjustment::None => raw.to_vec(),
        Adjustment::Bonferroni => raw.iter().map(|p| (p * m as f64).min(1.0)).collect(),
        Adjustment::Holm => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
            let mut adjusted = vec![0.0; m];
            let mut running_max: f64 = 0.0;
            for (pos, &idx) in order.iter().enumerate() {
                let scaled = (raw[idx] * (m - pos) as f64).min(1.0);
                running_max = running_max.max(scaled);
                adjusted[idx] = running_max;
            }
            adjusted
        }
    }
}

// ---------------------------------------------------------------------------
// Pearson correlation
// ---------------------------------------------------------------------------

/// Sample Pearson correlation with a two-sided p-value from the
/// t-distribution with N-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Stats(format!(
            "pearson length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Stats(format!(
            "pearson needs at least 3 pairs, found {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Stats(
            "pearson undefined: zero variance in an input".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * ((nf - 2.0) / (1.0 - r * r)).sqrt();
        student_t_two_sided(t, n - 2)
    };
    Ok((r, p))
}

// ---------------------------------------------------------------------------
// Simulator sickness questionnaire
// ---------------------------------------------------------------------------

/// Questionnaire subscale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subscale {
    Disorientation,
    Nausea,
    Oculomotor,
}

impl Subscale {
    pub fn as_str(self) -> &'static str {
        match self {
            Subscale::Disorientation => "disorientation",
            Subscale::Nausea => "nausea",
            Subscale::Oculomotor => "oculomotor",
        }
    }
}

/// Number of questionnaire items.
pub const SSQ_ITEMS: usize = 16;

/// Assignment of the 16 items to subscales. Items may carry several tags
/// in the classical overlapping assignment; the default here is a disjoint
/// partition so the subscale raw sums add up to the total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsqMapping {
    pub tags: [Vec<Subscale>; SSQ_ITEMS],
}

impl SsqMapping {
    /// Disjoint partition: every item contributes to exactly one subscale.
    pub fn disjoint() -> SsqMapping {
        use Subscale::*;
        SsqMapping {
            tags: [
                vec![Nausea],         // general discomfort
                vec![Oculomotor],     // fatigue
                vec![Oculomotor],     // headache
                vec![Oculomotor],     // eye strain
                vec![Oculomotor],     // difficulty focusing
                vec![Nausea],         // increased salivation
                vec![Nausea],         // sweating
                vec![Nausea],         // nausea
                vec![Oculomotor],     // difficulty concentrating
                vec![Disorientation], // fullness of head
                vec![Oculomotor],     // blurred vision
                vec![Disorientation], // dizziness (eyes open)
                vec![Disorientation], // dizziness (eyes closed)
                vec![Disorientation], // vertigo
                vec![Nausea],         // stomach awareness
                vec![Nausea],         // burping
            ],
        }
    }

    /// Classical overlapping assignment where several items load on more
    /// than one subscale.
    pub fn overlapping() -> SsqMapping {
        use Subscale::*;
        SsqMapping {
            tags: [
                vec![Nausea, Oculomotor],
                vec![Oculomotor],
                vec![Oculomotor],
                vec![Oculomotor],
                vec![Oculomotor, Disorientation],
                vec![Nausea],
                vec![Nausea],
                vec![Nausea, Disorientation],
                vec![Nausea, Oculomotor],
                vec![Disorientation],
                vec![Oculomotor, Disorientation],
                vec![Disorientation],
                vec![Disorientation],
                vec![Disorientation],
                vec![Nausea],
                vec![Nausea],
            ],
        }
    }

    pub fn is_partition(&self) -> bool {
        self.tags.iter().all(|t| t.len() == 1)
    }
}

/// One completed questionnaire: 16 items rated 0..=3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsqResponse {
    pub ratings: [u8; SSQ_ITEMS],
    pub mapping: SsqMapping,
}

impl SsqResponse {
    pub fn new(ratings: [u8; SSQ_ITEMS], mapping: SsqMapping) -> Result<SsqResponse> {
        if let Some((i, &r)) = ratings.iter().enumerate().find(|(_, &r)| r > 3) {
            return Err(Error::Domain(format!(
                "questionnaire item {} rating {r} outside 0..=3",
                i + 1
            )));
        }
        Ok(SsqResponse { ratings, mapping })
    }
}

/// Raw-sum questionnaire score: total over all 16 items (maximum 48) and
/// the raw sum per subscale under the response's item mapping.
pub fn ssq_score(resp: &SsqResponse) -> (u32, BTreeMap<Subscale, u32>) {
    let total = resp.ratings.iter().map(|&r| u32::from(r)).sum();
    let mut per: BTreeMap<Subscale, u32> = BTreeMap::new();
    per.insert(Subscale::Disorientation, 0);
    per.insert(Subscale::Nausea, 0);
    per.insert(Subscale::Oculomotor, 0);
    for (i, tags) in resp.mapping.tags.iter().enumerate() {
        for tag in tags {
            *per.get_mut(tag).unwrap() += u32::from(resp.ratings[i]);
        }
    }
    (total, per)
}

/// Significance stars at the conventional 0.05 / 0.01 / 0.001 / 0.0001
/// levels; empty when not significant.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.0001 {
        "****"
    } else if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}
