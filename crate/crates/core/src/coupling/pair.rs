//! Two independent dressed paths on the same window, path 1 pinned at the origin,
//! and the first time they occupy the same state.

use serde::{Deserialize, Serialize};

use super::dressed::{dress_flags, DressOptions, DressedPath};
use super::goodness::good_blocks;
use crate::bessel::{Decomposition, Excursion};
use crate::error::{Error, Result};
use crate::pinning::{DisorderField, GibbsWindow, PinningParams, WindowModel};
use crate::renewal::RenewalLaw;
use crate::seeds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetKind {
    IntegerPoint,
    ExcursionCrossing,
    LinearGapMerge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub met: bool,
    /// Meeting time, or `k` when censored.
    #[serde(rename = "T")]
    pub t: f64,
    pub censored: bool,
    pub met_kind: Option<MeetKind>,
    /// Good blocks among the supplied blocks.
    pub good_block_count: usize,
    /// Common contacts in `[0, k]` before `T` where the flags differ.
    pub psi_mismatch: usize,
    /// Overlapping flagged gaps whose excursion paths were unavailable.
    pub mesh_fallback: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    t: f64,
    kind: MeetKind,
}

fn improve(best: &mut Option<Candidate>, t: f64, kind: MeetKind) {
    if best.is_none_or(|b| t < b.t) {
        *best = Some(Candidate { t, kind });
    }
}

/// Gap index ranges of a path that intersect `[0, k]`.
fn gaps_in(p: &DressedPath, k: i64) -> std::ops::Range<usize> {
    let first = p.gap_index(0).unwrap_or(0);
    let last = p.contacts.partition_point(|&c| c < k).min(p.gap_count());
    first..last.max(first)
}

/// Earliest crossing inside a pair of overlapping flagged gaps, on the common mesh.
fn excursion_meeting(p1: &DressedPath, i: usize, p2: &DressedPath, j: usize, k: i64) -> Option<f64> {
    let (e1, e2) = (p1.excursions[i].as_ref()?, p2.excursions[j].as_ref()?);
    let (a1, b1) = p1.gap(i);
    let (a2, b2) = p2.gap(j);
    let mesh = e1.mesh as i64;
    let mut best = excursion_crossing_before(e1, a1, e2, a2, b1.min(b2), k, mesh);
    if b1 == b2 {
        // absorbed parts [T, b] overlap exactly when the gaps end together
        let t = (a1 as f64 + e1.hit_time).max(a2 as f64 + e2.hit_time);
        if t <= k as f64 && best.is_none_or(|c| t < c) {
            best = Some(t);
        }
    }
    best
}

/// Sign change of `φ¹ − φ²` between consecutive knots where both paths are still
/// above the absorption level; reported at the right knot.
fn excursion_crossing_before(
    e1: &Excursion,
    a1: i64,
    e2: &Excursion,
    a2: i64,
    end: i64,
    k: i64,
    mesh: i64,
) -> Option<f64> {
    let start = a1.max(a2) * mesh;
    let stop = end.min(k) * mesh;
    let value = |e: &Excursion, a: i64, knot: i64| e.values[(knot - a * mesh) as usize];
    let mut prev: Option<f64> = None;
    for knot in start..=stop {
        let (v1, v2) = (value(e1, a1, knot), value(e2, a2, knot));
        if v1 <= 0.0 || v2 <= 0.0 {
            break;
        }
        let d = v1 - v2;
        if d == 0.0 || prev.is_some_and(|p| p * d < 0.0) {
            return Some(knot as f64 / mesh as f64);
        }
        prev = Some(d);
    }
    None
}

/// Earliest meeting of the two paths in `[0, k]`, sampling excursions only where they
/// could still beat the current candidate.
pub fn detect_meeting(
    p1: &mut DressedPath,
    p2: &mut DressedPath,
    k: i64,
    opts: &DressOptions,
    decomposition: &Decomposition,
) -> (Option<(f64, MeetKind)>, usize, usize) {
    let mut best: Option<Candidate> = None;
    let mut mismatch_times = Vec::new();

    for &t in p1.contacts.iter().filter(|&&t| (0..=k).contains(&t)) {
        if p2.contains(t) {
            if p1.psi_at(t) == p2.psi_at(t) {
                improve(&mut best, t as f64, MeetKind::IntegerPoint);
                break;
            }
            mismatch_times.push(t);
        }
    }

    let (r1, r2) = (gaps_in(p1, k), gaps_in(p2, k));
    let mut flagged_pairs = Vec::new();
    let mut j0 = r2.start;
    for i in r1.clone() {
        let (a1, b1) = p1.gap(i);
        while j0 < r2.end && p2.gap(j0).1 <= a1 {
            j0 += 1;
        }
        let mut j = j0;
        while j < r2.end && p2.gap(j).0 < b1 {
            let (a2, b2) = p2.gap(j);
            let lo = a1.max(a2);
            match (p1.flags[i], p2.flags[j]) {
                (false, false) if b1 == b2 && lo <= k => improve(&mut best, lo as f64, MeetKind::LinearGapMerge),
                (true, true) if lo <= k => flagged_pairs.push((lo, i, j)),
                _ => {}
            }
            j += 1;
        }
    }

    flagged_pairs.sort();
    let mut fallback = 0;
    for (lo, i, j) in flagged_pairs {
        if best.is_some_and(|b| b.t <= lo as f64) {
            break;
        }
        let ok1 = p1.ensure_excursion(i, opts, decomposition);
        let ok2 = p2.ensure_excursion(j, opts, decomposition);
        if !(ok1 && ok2) {
            fallback += 1;
            continue;
        }
        if let Some(t) = excursion_meeting(p1, i, p2, j, k) {
            improve(&mut best, t, MeetKind::ExcursionCrossing);
        }
    }

    let found = best.filter(|b| b.t <= k as f64);
    let cutoff = found.map_or(k as f64, |b| b.t);
    let mismatch = mismatch_times.iter().filter(|&&t| (t as f64) < cutoff).count();
    (found.map(|b| (b.t, b.kind)), mismatch, fallback)
}

/// Precomputed Gibbs windows for repeated pair simulations on one disorder field.
#[derive(Clone, Debug)]
pub struct PairSimulator {
    left: GibbsWindow,
    right: GibbsWindow,
    free: GibbsWindow,
    pub decomposition: Decomposition,
    pub options: DressOptions,
    pub k: i64,
}

impl PairSimulator {
    pub fn new(
        law: &RenewalLaw,
        omega: &DisorderField,
        params: PinningParams,
        decomposition: &Decomposition,
        window: (i64, i64),
        k: i64,
        options: DressOptions,
    ) -> Result<Self> {
        options.validate()?;
        let (x, y) = window;
        if !(x < 0 && k > 0 && y >= k) {
            return Err(Error::Domain(format!("window {window:?} must contain [0, {k}] with x < 0")));
        }
        let site = |n: i64| omega.at(n);
        Ok(Self {
            left: GibbsWindow::new(WindowModel::from_sites(law, site, params, x, 0)?)?,
            right: GibbsWindow::new(WindowModel::from_sites(law, site, params, 0, y)?)?,
            free: GibbsWindow::new(WindowModel::from_sites(law, site, params, x, y)?)?,
            decomposition: decomposition.clone(),
            options,
            k,
        })
    }

    /// Contacts of a path conditioned on `0 ∈ τ` and of a free path.
    pub fn sample_contacts(&self, seed: u64) -> (Vec<i64>, Vec<i64>) {
        let mut rng1 = seeds::rng(seeds::derive(seed, 0));
        let mut tau1 = self.left.sample(&mut rng1);
        tau1.pop();
        tau1.extend(self.right.sample(&mut rng1));
        let tau2 = self.free.sample(&mut seeds::rng(seeds::derive(seed, 1)));
        (tau1, tau2)
    }

    /// One pair: the result together with both dressed paths.
    pub fn run_detailed(&self, seed: u64, blocks: &[(i64, i64)]) -> Result<(CouplingResult, DressedPath, DressedPath)> {
        let (tau1, tau2) = self.sample_contacts(seed);
        let d = &self.decomposition;
        let mut p1 = dress_flags(&tau1, d, self.options.mesh, seeds::derive(seed, 2))?;
        let mut p2 = dress_flags(&tau2, d, self.options.mesh, seeds::derive(seed, 3))?;
        let (found, psi_mismatch, mesh_fallback) = detect_meeting(&mut p1, &mut p2, self.k, &self.options, d);
        let good_block_count = good_blocks(&p1, &p2, blocks).iter().filter(|&&g| g).count();
        let result = CouplingResult {
            met: found.is_some(),
            t: found.map_or(self.k as f64, |f| f.0),
            censored: found.is_none(),
            met_kind: found.map(|f| f.1),
            good_block_count,
            psi_mismatch,
            mesh_fallback,
        };
        Ok((result, p1, p2))
    }

    pub fn run(&self, seed: u64, blocks: &[(i64, i64)]) -> Result<CouplingResult> {
        Ok(self.run_detailed(seed, blocks)?.0)
    }
}

/// A single pair on `window`, with meetings searched in `[0, k]` on excursion mesh `mesh`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pair(
    law: &RenewalLaw,
    omega: &DisorderField,
    params: PinningParams,
    decomposition: &Decomposition,
    window: (i64, i64),
    k: i64,
    mesh: usize,
    seed: u64,
) -> Result<CouplingResult> {
    let options = DressOptions { mesh, ..DressOptions::default() };
    PairSimulator::new(law, omega, params, decomposition, window, k, options)?.run(seed, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{decompose_k, discretize_k_delta, BesselSpec};
    use crate::pinning::{sample_disorder, DisorderLaw};
    use crate::renewal::Family;

    fn setup() -> (RenewalLaw, Decomposition) {
        let k = RenewalLaw::power_law(Family::PowerLawConstL, 1.5, 256).unwrap();
        let spec = BesselSpec::for_gap_law(Family::PowerLawConstL, 1.5, 0.25).unwrap();
        let d = decompose_k(&k, &discretize_k_delta(&spec, 256).unwrap()).unwrap();
        (k, d)
    }

    fn detect(p1: &mut DressedPath, p2: &mut DressedPath, k: i64) -> Option<(f64, MeetKind)> {
        let (_, d) = setup();
        detect_meeting(p1, p2, k, &DressOptions::default(), &d).0
    }

    #[test]
    fn common_contact_with_equal_flags_meets() {
        let mut p1 = DressedPath::from_parts(vec![-3, 0, 5, 9], vec![false, true, false], 4).unwrap();
        let mut p2 = DressedPath::from_parts(vec![-1, 3, 5, 7], vec![false, false, false], 4).unwrap();
        assert_eq!(detect(&mut p1, &mut p2, 8), Some((5.0, MeetKind::IntegerPoint)));
    }

    #[test]
    fn differing_flags_are_logged_not_met() {
        let (_, d) = setup();
        let mut p1 = DressedPath::from_parts(vec![0, 3, 9], vec![false, false], 4).unwrap();
        let mut p2 = DressedPath::from_parts(vec![-1, 3, 8], vec![true, true], 4).unwrap();
        let (found, mismatch, _) = detect_meeting(&mut p1, &mut p2, 9, &DressOptions::default(), &d);
        assert_eq!(mismatch, 1);
        assert!(found.is_none());
    }

    #[test]
    fn ramps_with_common_end_merge() {
        let mut p1 = DressedPath::from_parts(vec![0, 2, 9, 12], vec![true, false, false], 4).unwrap();
        let mut p2 = DressedPath::from_parts(vec![-4, 5, 9, 10], vec![true, false, true], 4).unwrap();
        assert_eq!(detect(&mut p1, &mut p2, 12), Some((5.0, MeetKind::LinearGapMerge)));
        assert_eq!(detect(&mut p1, &mut p2, 4), None);
    }

    #[test]
    fn meeting_time_never_grows_under_refinement() {
        let (k, d) = setup();
        let om = sample_disorder(DisorderLaw::Rademacher, (-64, 64), 1).unwrap();
        let params = PinningParams::new(0.0, -0.2).unwrap();
        let sim = |mesh| {
            let opts = DressOptions { mesh, cap: 8, ..DressOptions::default() };
            PairSimulator::new(&k, &om, params, &d, (-48, 48), 16, opts).unwrap()
        };
        let (coarse, fine) = (sim(2), sim(16));
        let mut crossings = 0;
        for s in 0..300 {
            let a = coarse.run(s, &[]).unwrap();
            let b = fine.run(s, &[]).unwrap();
            assert!(b.t <= a.t, "seed {s}: {} > {}", b.t, a.t);
            assert!(a.met <= b.met);
            crossings += (b.met_kind == Some(MeetKind::ExcursionCrossing)) as usize;
            assert!(b.t >= 0.0 && b.t <= 16.0);
        }
        assert!(crossings > 0);
    }

    #[test]
    fn pinned_path_contains_origin() {
        let (k, d) = setup();
        let om = sample_disorder(DisorderLaw::UniformSym, (-40, 40), 2).unwrap();
        let params = PinningParams::new(0.5, -0.3).unwrap();
        let sim = PairSimulator::new(&k, &om, params, &d, (-30, 40), 10, DressOptions::default()).unwrap();
        for s in 0..50 {
            let (t1, t2) = sim.sample_contacts(s);
            assert!(t1.contains(&0));
            assert_eq!((t1[0], *t1.last().unwrap()), (-30, 40));
            assert_eq!((t2[0], *t2.last().unwrap()), (-30, 40));
            assert!(t1.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(simulate_pair(&k, &om, params, &d, (0, 40), 10, 4, 0).is_err());
    }
}
