//! Canonical in-memory representation of (possibly unbalanced) panel data.
//!
//! Observations are stored sorted by (individual, time); every downstream
//! scan (lag pairing, spectral sums, group reductions) relies on that order.
//! Individual and time identifiers are mapped to dense group indices; the
//! original calendar period of each observation is kept alongside so that
//! sub-panels extracted for the jackknife preserve lag structure.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// An individual identifier: integer keys sort numerically, string keys
/// lexically, integers before strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Key {
    Int(i64),
    Str(String),
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Int(v) => write!(f, "{v}"),
            Key::Str(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for Key {
    fn from(v: i64) -> Self {
        Key::Int(v)
    }
}

impl From<&str> for Key {
    fn from(s: &str) -> Self {
        match s.parse::<i64>() {
            Ok(v) => Key::Int(v),
            Err(_) => Key::Str(s.to_string()),
        }
    }
}

/// Whether a regressor enters partial effects as a derivative or a contrast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Continuous,
    Binary,
}

/// One raw observation before validation.
#[derive(Debug, Clone)]
pub struct Row {
    pub indiv: Key,
    pub time: i64,
    pub y: f64,
    pub x: Vec<f64>,
}

/// The two error-component factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Indiv,
    Time,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Indiv => "individual",
            Factor::Time => "time",
        }
    }
}

/// Dense group index structure for one factor: per-observation group ids plus
/// CSR-style per-group observation lists. This is the index form of the dummy
/// matrix D_k; the matrix itself is never materialized.
#[derive(Debug, Clone)]
pub struct FactorMap {
    pub group_count: usize,
    pub group_of: Vec<u32>,
    offsets: Vec<usize>,
    members: Vec<u32>,
}

impl FactorMap {
    fn build(group_of: Vec<u32>, group_count: usize) -> Self {
        let mut counts = vec![0usize; group_count];
        for &g in &group_of {
            counts[g as usize] += 1;
        }
        let mut offsets = vec![0usize; group_count + 1];
        for g in 0..group_count {
            offsets[g + 1] = offsets[g] + counts[g];
        }
        let mut cursor = offsets.clone();
        let mut members = vec![0u32; group_of.len()];
        for (k, &g) in group_of.iter().enumerate() {
            members[cursor[g as usize]] = k as u32;
            cursor[g as usize] += 1;
        }
        Self {
            group_count,
            group_of,
            offsets,
            members,
        }
    }

    /// Observation indices of group `g`, in (individual, time) order.
    #[inline]
    pub fn group(&self, g: usize) -> &[u32] {
        &self.members[self.offsets[g]..self.offsets[g + 1]]
    }

    pub fn group_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.group_count).map(|g| self.offsets[g + 1] - self.offsets[g])
    }
}

/// Record of observations removed during construction or pruning.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DropLog {
    /// Individuals dropped at construction for having a single observation.
    pub singleton_indivs: Vec<Key>,
    /// Groups removed per pruning pass, in pass order.
    pub passes: Vec<DropPass>,
    pub n_dropped_obs: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DropPass {
    pub indivs: Vec<Key>,
    pub times: Vec<i64>,
}

impl DropLog {
    pub fn is_empty(&self) -> bool {
        self.singleton_indivs.is_empty() && self.passes.is_empty()
    }
}

/// Validated panel with dense factor indices.
#[derive(Debug, Clone)]
pub struct PanelData {
    outcome: Vec<f64>,
    cols: Vec<Vec<f64>>, // column-major, one Vec per regressor
    names: Vec<String>,
    kinds: Vec<RegressorKind>,
    indiv_keys: Vec<Key>,
    cal_periods: Vec<i64>,
    cal_time: Vec<i64>,
    indiv_map: FactorMap,
    time_map: FactorMap,
    lag_map: Vec<Option<u32>>,
}

impl PanelData {
    pub fn n_obs(&self) -> usize {
        self.outcome.len()
    }
    pub fn n_indiv(&self) -> usize {
        self.indiv_map.group_count
    }
    pub fn n_time(&self) -> usize {
        self.time_map.group_count
    }
    pub fn n_reg(&self) -> usize {
        self.cols.len()
    }
    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }
    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }
    pub fn columns(&self) -> &[Vec<f64>] {
        &self.cols
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn kinds(&self) -> &[RegressorKind] {
        &self.kinds
    }
    pub fn indiv_keys(&self) -> &[Key] {
        &self.indiv_keys
    }
    /// Sorted distinct calendar periods present in the panel.
    pub fn cal_periods(&self) -> &[i64] {
        &self.cal_periods
    }
    /// Calendar period of each observation.
    pub fn cal_time(&self) -> &[i64] {
        &self.cal_time
    }
    pub fn factor(&self, f: Factor) -> &FactorMap {
        match f {
            Factor::Indiv => &self.indiv_map,
            Factor::Time => &self.time_map,
        }
    }
    /// Index of the same individual's observation at the previous calendar
    /// period, when observed.
    pub fn lag_map(&self) -> &[Option<u32>] {
        &self.lag_map
    }

    /// Row of the regressor matrix at observation `k`.
    pub fn x_row(&self, k: usize) -> Vec<f64> {
        self.cols.iter().map(|c| c[k]).collect()
    }

    /// Shortest per-individual observation count.
    pub fn min_span(&self) -> usize {
        self.indiv_map.group_sizes().min().unwrap_or(0)
    }

    pub fn is_binary_outcome(&self) -> bool {
        self.outcome.iter().all(|&y| y == 0.0 || y == 1.0)
    }

    /// Reconstruct raw rows (inverse of `build_panel` up to drops).
    pub fn to_rows(&self) -> Vec<Row> {
        (0..self.n_obs())
            .map(|k| Row {
                indiv: self.indiv_keys[self.indiv_map.group_of[k] as usize].clone(),
                time: self.cal_time[k],
                y: self.outcome[k],
                x: self.x_row(k),
            })
            .collect()
    }

    /// Keep the observations flagged in `keep`, re-densify both factors, and
    /// rebuild the lag map. When `drop_singletons` is set, individuals left
    /// with fewer than two observations are removed as well.
    fn select(&self, keep: &[bool], drop_singletons: bool, empty_err: Error) -> Result<PanelData> {
        let mut keep = keep.to_vec();
        if drop_singletons {
            let mut counts = vec![0usize; self.n_indiv()];
            for (k, &kp) in keep.iter().enumerate() {
                if kp {
                    counts[self.indiv_map.group_of[k] as usize] += 1;
                }
            }
            for (k, kp) in keep.iter_mut().enumerate() {
                if *kp && counts[self.indiv_map.group_of[k] as usize] < 2 {
                    *kp = false;
                }
            }
        }
        let idx: Vec<usize> = (0..self.n_obs()).filter(|&k| keep[k]).collect();
        if idx.is_empty() {
            return Err(empty_err);
        }

        let outcome: Vec<f64> = idx.iter().map(|&k| self.outcome[k]).collect();
        let cols: Vec<Vec<f64>> = self
            .cols
            .iter()
            .map(|c| idx.iter().map(|&k| c[k]).collect())
            .collect();
        let cal_time: Vec<i64> = idx.iter().map(|&k| self.cal_time[k]).collect();

        // Re-densify individuals. Source order is already (indiv, time) sorted,
        // so kept old group ids appear in non-decreasing runs.
        let mut indiv_keys = Vec::new();
        let mut indiv_of = Vec::with_capacity(idx.len());
        let mut last_old: Option<u32> = None;
        for &k in &idx {
            let old = self.indiv_map.group_of[k];
            if last_old != Some(old) {
                indiv_keys.push(self.indiv_keys[old as usize].clone());
                last_old = Some(old);
            }
            indiv_of.push((indiv_keys.len() - 1) as u32);
        }

        // Re-densify observed calendar periods.
        let mut cal_periods: Vec<i64> = cal_time.clone();
        cal_periods.sort_unstable();
        cal_periods.dedup();
        let time_of: Vec<u32> = cal_time
            .iter()
            .map(|t| cal_periods.binary_search(t).expect("period present") as u32)
            .collect();

        let n_indiv = indiv_keys.len();
        let n_time = cal_periods.len();
        let indiv_map = FactorMap::build(indiv_of, n_indiv);
        let time_map = FactorMap::build(time_of, n_time);
        let lag_map = build_lag_map(&indiv_map.group_of, &cal_time);

        Ok(PanelData {
            outcome,
            cols,
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            indiv_keys,
            cal_periods,
            cal_time,
            indiv_map,
            time_map,
            lag_map,
        })
    }
}

fn build_lag_map(indiv_of: &[u32], cal_time: &[i64]) -> Vec<Option<u32>> {
    // Rows are sorted by (indiv, time) and cells are unique, so the t-1
    // observation, when present, is exactly the previous row.
    (0..indiv_of.len())
        .map(|k| {
            if k > 0 && indiv_of[k - 1] == indiv_of[k] && cal_time[k - 1] == cal_time[k] - 1 {
                Some((k - 1) as u32)
            } else {
                None
            }
        })
        .collect()
}

/// Validate, sort, and index raw rows into a [`PanelData`].
///
/// Duplicate (individual, time) cells are an error; individuals with a single
/// observation carry no within information and are dropped with a log entry.
pub fn build_panel(
    mut rows: Vec<Row>,
    names: Vec<String>,
    kinds: Vec<RegressorKind>,
) -> Result<(PanelData, DropLog)> {
    let n_reg = names.len();
    if kinds.len() != n_reg {
        return Err(Error::Data(format!(
            "{} regressor names but {} kinds",
            n_reg,
            kinds.len()
        )));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.x.len() != n_reg {
            return Err(Error::RaggedRegressors {
                row: r,
                got: row.x.len(),
                expected: n_reg,
            });
        }
        if !row.y.is_finite() || row.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value in row {r}")));
        }
        for (j, &v) in row.x.iter().enumerate() {
            if kinds[j] == RegressorKind::Binary && v != 0.0 && v != 1.0 {
                return Err(Error::NonBinaryRegressor {
                    name: names[j].clone(),
                    value: v,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyPanel);
    }

    rows.sort_by(|a, b| a.indiv.cmp(&b.indiv).then(a.time.cmp(&b.time)));
    for w in rows.windows(2) {
        if w[0].indiv == w[1].indiv && w[0].time == w[1].time {
            return Err(Error::DuplicateCell {
                indiv: w[0].indiv.to_string(),
                time: w[0].time,
            });
        }
    }

    // Drop singleton individuals. Removing one never creates another.
    let mut log = DropLog::default();
    let mut kept: Vec<Row> = Vec::with_capacity(rows.len());
    let mut run_start = 0usize;
    for i in 0..=rows.len() {
        let run_ends = i == rows.len() || rows[i].indiv != rows[run_start].indiv;
        if run_ends {
            if i - run_start >= 2 {
                kept.extend(rows[run_start..i].iter().cloned());
            } else {
                log.singleton_indivs.push(rows[run_start].indiv.clone());
                log.n_dropped_obs += 1;
            }
            run_start = i;
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyPanel);
    }

    let mut indiv_keys: Vec<Key> = Vec::new();
    let mut indiv_of: Vec<u32> = Vec::with_capacity(kept.len());
    for row in &kept {
        if indiv_keys.last() != Some(&row.indiv) {
            indiv_keys.push(row.indiv.clone());
        }
        indiv_of.push((indiv_keys.len() - 1) as u32);
    }

    let mut cal_periods: Vec<i64> = kept.iter().map(|r| r.time).collect();
    cal_periods.sort_unstable();
    cal_periods.dedup();
    let time_of: Vec<u32> = kept
        .iter()
        .map(|r| cal_periods.binary_search(&r.time).expect("period present") as u32)
        .collect();

    let outcome: Vec<f64> = kept.iter().map(|r| r.y).collect();
    let cols: Vec<Vec<f64>> = (0..n_reg)
        .map(|j| kept.iter().map(|r| r.x[j]).collect())
        .collect();
    let cal_time: Vec<i64> = kept.iter().map(|r| r.time).collect();

    let n_indiv = indiv_keys.len();
    let n_time = cal_periods.len();
    let indiv_map = FactorMap::build(indiv_of, n_indiv);
    let time_map = FactorMap::build(time_of, n_time);
    let lag_map = build_lag_map(&indiv_map.group_of, &cal_time);

    Ok((
        PanelData {
            outcome,
            cols,
            names,
            kinds,
            indiv_keys,
            cal_periods,
            cal_time,
            indiv_map,
            time_map,
            lag_map,
        },
        log,
    ))
}

/// Iteratively remove every individual group and every time group whose
/// outcomes are all 0 or all 1, until a fixed point. The fixed-effects MLE is
/// undefined for such groups.
pub fn drop_noninformative(p: &PanelData) -> Result<(PanelData, DropLog)> {
    if !p.is_binary_outcome() {
        return Err(Error::Data(
            "drop_noninformative requires a binary outcome".into(),
        ));
    }
    let mut cur = p.clone();
    let mut log = DropLog::default();
    loop {
        let mut pass = DropPass::default();
        let mut keep = vec![true; cur.n_obs()];
        for f in [Factor::Indiv, Factor::Time] {
            let map = cur.factor(f);
            for g in 0..map.group_count {
                let obs = map.group(g);
                let first = cur.outcome[obs[0] as usize];
                if obs.iter().all(|&k| cur.outcome[k as usize] == first) {
                    for &k in obs {
                        keep[k as usize] = false;
                    }
                    match f {
                        Factor::Indiv => pass.indivs.push(cur.indiv_keys[g].clone()),
                        Factor::Time => pass.times.push(cur.cal_periods[g]),
                    }
                }
            }
        }
        if pass.indivs.is_empty() && pass.times.is_empty() {
            break;
        }
        log.n_dropped_obs += keep.iter().filter(|&&k| !k).count();
        log.passes.push(pass);
        cur = cur.select(&keep, false, Error::EmptyPanel)?;
    }
    Ok((cur, log))
}

/// Which half of each factor a sub-panel keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    Low,
    High,
}

/// Sub-panel selectors for the split-panel jackknife: half-panels along one
/// factor, or quadrants along both. Halves overlap at the midpoint when the
/// group count is odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubpanelSelector {
    Indiv(Half),
    Time(Half),
    Quadrant(Half, Half),
}

fn in_half(pos: usize, count: usize, half: Half) -> bool {
    match half {
        Half::Low => pos < count.div_ceil(2),
        Half::High => pos >= count / 2,
    }
}

/// Extract a sub-panel with re-densified factor indices; calendar periods are
/// preserved so lag pairing in the sub-panel matches the parent. Individuals
/// reduced to a single observation are dropped.
pub fn split_subpanel(p: &PanelData, sel: SubpanelSelector) -> Result<PanelData> {
    let n = p.n_indiv();
    let t = p.n_time();
    let keep: Vec<bool> = (0..p.n_obs())
        .map(|k| {
            let gi = p.indiv_map.group_of[k] as usize;
            let gt = p.time_map.group_of[k] as usize;
            match sel {
                SubpanelSelector::Indiv(h) => in_half(gi, n, h),
                SubpanelSelector::Time(h) => in_half(gt, t, h),
                SubpanelSelector::Quadrant(hi, ht) => in_half(gi, n, hi) && in_half(gt, t, ht),
            }
        })
        .collect();
    p.select(&keep, true, Error::EmptySubpanel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: i64, t: i64, y: f64, x: Vec<f64>) -> Row {
        Row {
            indiv: Key::Int(i),
            time: t,
            y,
            x,
        }
    }

    fn small_panel() -> (PanelData, DropLog) {
        let rows = (1..=3)
            .flat_map(|i| {
                (1..=2).map(move |t| row(i, t, ((i + t) % 2) as f64, vec![i as f64 + t as f64]))
            })
            .collect();
        build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap()
    }

    #[test]
    fn builds_dense_sorted_panel() {
        let (p, log) = small_panel();
        assert_eq!(p.n_indiv(), 3);
        assert_eq!(p.n_time(), 2);
        assert_eq!(p.n_obs(), 6);
        assert!(log.is_empty());
        // sorted by (indiv, time)
        for w in 0..5 {
            let a = (p.factor(Factor::Indiv).group_of[w], p.cal_time()[w]);
            let b = (p.factor(Factor::Indiv).group_of[w + 1], p.cal_time()[w + 1]);
            assert!(a < b);
        }
    }

    #[test]
    fn duplicate_cell_is_an_error() {
        let rows = vec![
            row(1, 3, 0.0, vec![1.0]),
            row(1, 3, 1.0, vec![2.0]),
            row(2, 1, 1.0, vec![0.0]),
            row(2, 2, 0.0, vec![0.0]),
        ];
        match build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]) {
            Err(Error::DuplicateCell { indiv, time }) => {
                assert_eq!(indiv, "1");
                assert_eq!(time, 3);
            }
            other => panic!("expected DuplicateCell, got {other:?}"),
        }
    }

    #[test]
    fn ragged_regressors_rejected() {
        let rows = vec![row(1, 1, 0.0, vec![1.0, 2.0])];
        assert!(matches!(
            build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]),
            Err(Error::RaggedRegressors { .. })
        ));
    }

    #[test]
    fn singletons_dropped_with_log() {
        let rows = vec![
            row(1, 1, 0.0, vec![0.0]),
            row(1, 2, 1.0, vec![0.0]),
            row(2, 5, 1.0, vec![0.0]),
        ];
        let (p, log) =
            build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        assert_eq!(p.n_indiv(), 1);
        assert_eq!(log.singleton_indivs, vec![Key::Int(2)]);
    }

    #[test]
    fn lag_map_spans_gaps() {
        // spans {1..10} and {5..30}
        let mut rows = Vec::new();
        for t in 1..=10 {
            rows.push(row(1, t, (t % 2) as f64, vec![t as f64]));
        }
        for t in 5..=30 {
            rows.push(row(2, t, (t % 2) as f64, vec![t as f64]));
        }
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        // enumerate consecutive-time pairs by scan, independently of build order
        let mut expected = 0;
        for k in 0..p.n_obs() {
            let gi = p.factor(Factor::Indiv).group_of[k];
            let has_lag = (0..p.n_obs()).any(|m| {
                p.factor(Factor::Indiv).group_of[m] == gi && p.cal_time()[m] == p.cal_time()[k] - 1
            });
            if has_lag {
                expected += 1;
                assert!(p.lag_map()[k].is_some(), "obs {k} should have a lag");
            } else {
                assert!(p.lag_map()[k].is_none());
            }
        }
        assert_eq!(expected, p.n_obs() - 2); // all but each individual's first
    }

    #[test]
    fn prune_removes_constant_groups_to_fixed_point() {
        // individual 2 always 1; once it is gone period 3 becomes constant
        let rows = vec![
            row(1, 1, 0.0, vec![0.0]),
            row(1, 2, 1.0, vec![0.0]),
            row(2, 1, 1.0, vec![0.0]),
            row(2, 3, 1.0, vec![0.0]),
            row(3, 1, 1.0, vec![0.0]),
            row(3, 2, 0.0, vec![0.0]),
            row(3, 3, 0.0, vec![0.0]),
        ];
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        let (pruned, log) = drop_noninformative(&p).unwrap();
        assert_eq!(pruned.n_indiv(), 2);
        assert!(!pruned.cal_periods().contains(&3));
        assert!(log.passes.len() >= 2);
        assert_eq!(log.passes[0].indivs, vec![Key::Int(2)]);
    }

    #[test]
    fn prune_is_identity_on_informative_panels_and_idempotent() {
        let (p, _) = small_panel();
        let (pruned, log) = drop_noninformative(&p).unwrap();
        assert_eq!(pruned.n_obs(), p.n_obs());
        assert!(log.is_empty());
        let (again, log2) = drop_noninformative(&pruned).unwrap();
        assert_eq!(again.n_obs(), pruned.n_obs());
        assert!(log2.is_empty());
    }

    /// Brute-force fixed point computed by repeated full rescans over raw
    /// rows, independent of the production pruning path.
    #[test]
    fn prune_matches_bruteforce_fixed_point() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(20240811);
        let mut rows = Vec::new();
        for i in 0..50 {
            for t in 0..10 {
                rows.push(row(
                    i,
                    t,
                    if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
                    vec![0.0],
                ));
            }
        }
        let mut cells: Vec<(i64, i64, f64)> = rows
            .iter()
            .map(|r| {
                let k = match &r.indiv {
                    Key::Int(v) => *v,
                    _ => unreachable!(),
                };
                (k, r.time, r.y)
            })
            .collect();
        loop {
            let mut removed = false;
            for pick_indiv in [true, false] {
                let ids: Vec<i64> = {
                    let mut v: Vec<i64> = cells
                        .iter()
                        .map(|c| if pick_indiv { c.0 } else { c.1 })
                        .collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                for id in ids {
                    let ys: Vec<f64> = cells
                        .iter()
                        .filter(|c| (if pick_indiv { c.0 } else { c.1 }) == id)
                        .map(|c| c.2)
                        .collect();
                    if !ys.is_empty() && ys.iter().all(|&y| y == ys[0]) {
                        cells.retain(|c| (if pick_indiv { c.0 } else { c.1 }) != id);
                        removed = true;
                    }
                }
            }
            if !removed {
                break;
            }
        }
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        let (pruned, _) = drop_noninformative(&p).unwrap();
        let mut got: Vec<(i64, i64)> = (0..pruned.n_obs())
            .map(|k| {
                let key = &pruned.indiv_keys()[pruned.factor(Factor::Indiv).group_of[k] as usize];
                let id = match key {
                    Key::Int(v) => *v,
                    _ => unreachable!(),
                };
                (id, pruned.cal_time()[k])
            })
            .collect();
        got.sort_unstable();
        let mut want: Vec<(i64, i64)> = cells.iter().map(|c| (c.0, c.1)).collect();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    fn balanced(n: i64, t: i64) -> PanelData {
        let rows = (1..=n)
            .flat_map(|i| {
                (1..=t).map(move |tt| {
                    row(
                        i,
                        tt,
                        ((i * 7 + tt * 3) % 2) as f64,
                        vec![(i * t + tt) as f64],
                    )
                })
            })
            .collect();
        build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous])
            .unwrap()
            .0
    }

    #[test]
    fn even_split_partitions_individuals() {
        let p = balanced(4, 4);
        let lo = split_subpanel(&p, SubpanelSelector::Indiv(Half::Low)).unwrap();
        let hi = split_subpanel(&p, SubpanelSelector::Indiv(Half::High)).unwrap();
        assert_eq!(lo.indiv_keys(), &[Key::Int(1), Key::Int(2)]);
        assert_eq!(hi.indiv_keys(), &[Key::Int(3), Key::Int(4)]);
    }

    #[test]
    fn odd_split_overlaps_at_midpoint() {
        let p = balanced(5, 4);
        let lo = split_subpanel(&p, SubpanelSelector::Indiv(Half::Low)).unwrap();
        let hi = split_subpanel(&p, SubpanelSelector::Indiv(Half::High)).unwrap();
        assert_eq!(lo.indiv_keys(), &[Key::Int(1), Key::Int(2), Key::Int(3)]);
        assert_eq!(hi.indiv_keys(), &[Key::Int(3), Key::Int(4), Key::Int(5)]);
    }

    #[test]
    fn quadrants_partition_even_panels() {
        let p = balanced(4, 4);
        let mut total = 0;
        let mut seen = std::collections::HashSet::new();
        for hi in [Half::Low, Half::High] {
            for ht in [Half::Low, Half::High] {
                let q = split_subpanel(&p, SubpanelSelector::Quadrant(hi, ht)).unwrap();
                total += q.n_obs();
                for r in q.to_rows() {
                    seen.insert((r.indiv, r.time));
                }
            }
        }
        assert_eq!(total, p.n_obs());
        assert_eq!(seen.len(), p.n_obs());
    }

    #[test]
    fn time_split_uses_calendar_median() {
        // pattern-1 flavor: individual 1 observed 1..=4, individual 2 observed 1..=8
        let mut rows: Vec<Row> = (1..=4)
            .map(|t| row(1, t, (t % 2) as f64, vec![0.0]))
            .collect();
        rows.extend((1..=8).map(|t| row(2, t, (t % 2) as f64, vec![0.0])));
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        let hi = split_subpanel(&p, SubpanelSelector::Time(Half::High)).unwrap();
        // late half keeps periods 5..=8, so only individual 2 survives
        assert_eq!(hi.indiv_keys(), &[Key::Int(2)]);
        assert_eq!(hi.cal_periods(), &[5, 6, 7, 8]);
        let lo = split_subpanel(&p, SubpanelSelector::Time(Half::Low)).unwrap();
        assert_eq!(lo.indiv_keys(), &[Key::Int(1), Key::Int(2)]);
    }

    #[test]
    fn roundtrip_rows_rebuild_identical_panel() {
        let (p, _) = small_panel();
        let (p2, log) = build_panel(p.to_rows(), p.names().to_vec(), p.kinds().to_vec()).unwrap();
        assert!(log.is_empty());
        assert_eq!(p.outcome(), p2.outcome());
        assert_eq!(p.cal_time(), p2.cal_time());
        assert_eq!(p.col(0), p2.col(0));
        assert_eq!(p.indiv_keys(), p2.indiv_keys());
    }
}
