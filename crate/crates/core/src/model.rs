//! Observed data, latent principal strata, estimands and assumption sets.
//!
//! A unit's principal stratum is the quadruple `(A0, A1, Y0, Y1)` written
//! `ij,kl`: `i = A0`, `j = A1` is the compliance type and `k = Y0`, `l = Y1`
//! the response type. Strata are indexed lexicographically so that index
//! `4 * (2i + j) + (2k + l)` is stable across dumps, fixtures and CLI output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_STRATA: usize = 16;
pub const NUM_CELLS: usize = 8;

/// One observed unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialRecord {
    pub z: u8,
    pub a: u8,
    pub y: u8,
}

impl TrialRecord {
    pub fn new(z: u8, a: u8, y: u8) -> Result<Self> {
        for (name, v) in [("z", z), ("a", a), ("y", y)] {
            if v > 1 {
                return Err(Error::InvalidValue(format!("{name}={v} is not binary")));
            }
        }
        Ok(Self { z, a, y })
    }
}

/// Index of an observable cell `(a, y)` within one instrument arm.
#[inline]
pub fn cell(a: u8, y: u8) -> usize {
    (2 * a + y) as usize
}

/// Compliance type `ij = (A0, A1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Compliance {
    NeverTaker,
    Complier,
    Defier,
    AlwaysTaker,
}

impl Compliance {
    pub const ALL: [Compliance; 4] = [
        Compliance::NeverTaker,
        Compliance::Complier,
        Compliance::Defier,
        Compliance::AlwaysTaker,
    ];

    /// The two-bit code `2i + j`.
    pub fn code(self) -> u8 {
        match self {
            Compliance::NeverTaker => 0b00,
            Compliance::Complier => 0b01,
            Compliance::Defier => 0b10,
            Compliance::AlwaysTaker => 0b11,
        }
    }

    pub fn from_code(code: u8) -> Self {
        Self::ALL[(code & 0b11) as usize]
    }
}

/// A principal stratum, `0..16` in `(ij, kl)` lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Stratum(u8);

impl Stratum {
    pub fn new(index: usize) -> Self {
        assert!(index < NUM_STRATA, "stratum index {index} out of range");
        Stratum(index as u8)
    }

    pub fn from_bits(a0: u8, a1: u8, y0: u8, y1: u8) -> Self {
        Stratum(((2 * a0 + a1) << 2) | (2 * y0 + y1))
    }

    pub fn all() -> impl Iterator<Item = Stratum> {
        (0..NUM_STRATA as u8).map(Stratum)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn compliance(self) -> Compliance {
        Compliance::from_code(self.0 >> 2)
    }

    pub fn a0(self) -> u8 {
        (self.0 >> 3) & 1
    }
    pub fn a1(self) -> u8 {
        (self.0 >> 2) & 1
    }
    pub fn y0(self) -> u8 {
        (self.0 >> 1) & 1
    }
    pub fn y1(self) -> u8 {
        self.0 & 1
    }

    /// Treatment this stratum takes when the instrument is set to `z`.
    pub fn treatment(self, z: u8) -> u8 {
        if z == 0 {
            self.a0()
        } else {
            self.a1()
        }
    }

    /// Outcome under treatment `a`.
    pub fn outcome(self, a: u8) -> u8 {
        if a == 0 {
            self.y0()
        } else {
            self.y1()
        }
    }

    /// The observable cell `(a, y)` this stratum lands in under arm `z`.
    pub fn observed_cell(self, z: u8) -> usize {
        let a = self.treatment(z);
        cell(a, self.outcome(a))
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}{},{}{}", self.a0(), self.a1(), self.y0(), self.y1())
    }
}

/// Cell counts `n[z][a][y]`, stored per arm in cell order `(0,0),(0,1),(1,0),(1,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountsTable {
    n: [[u64; 4]; 2],
}

impl CountsTable {
    pub fn new(n: [[u64; 4]; 2]) -> Self {
        Self { n }
    }

    pub fn get(&self, z: u8, a: u8, y: u8) -> u64 {
        self.n[z as usize][cell(a, y)]
    }

    pub fn arm(&self, z: u8) -> &[u64; 4] {
        &self.n[z as usize]
    }

    pub fn cells(&self) -> &[[u64; 4]; 2] {
        &self.n
    }

    pub fn arm_total(&self, z: u8) -> u64 {
        self.n[z as usize].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.arm_total(0) + self.arm_total(1)
    }

    /// Errors unless both instrument arms carry at least one record.
    pub fn require_both_arms(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(Error::EmptyData);
        }
        for z in 0..2u8 {
            if self.arm_total(z) == 0 {
                return Err(Error::MissingArm { arm: z });
            }
        }
        Ok(())
    }
}

/// Tally records into the two per-arm multinomials.
pub fn summarize(records: &[TrialRecord]) -> Result<CountsTable> {
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut n = [[0u64; 4]; 2];
    for r in records {
        n[r.z as usize][cell(r.a, r.y)] += 1;
    }
    let counts = CountsTable::new(n);
    counts.require_both_arms()?;
    Ok(counts)
}

/// Conditional cell probabilities `q[z][a][y] = P(A=a, Y=y | Z=z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableDist {
    q: [[f64; 4]; 2],
}

impl ObservableDist {
    const SUM_TOL: f64 = 1e-12;

    pub fn new(q: [[f64; 4]; 2]) -> Result<Self> {
        for (z, arm) in q.iter().enumerate() {
            if arm.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidValue(format!(
                    "arm {z} has a probability outside [0, 1]: {arm:?}"
                )));
            }
            let s: f64 = arm.iter().sum();
            if (s - 1.0).abs() > Self::SUM_TOL {
                return Err(Error::InvalidValue(format!("arm {z} sums to {s}, not 1")));
            }
        }
        Ok(Self { q })
    }

    /// Builds from raw values without validation; used where the simplex
    /// property holds by construction up to rounding.
    pub(crate) fn from_raw(q: [[f64; 4]; 2]) -> Self {
        Self { q }
    }

    pub fn get(&self, z: u8, a: u8, y: u8) -> f64 {
        self.q[z as usize][cell(a, y)]
    }

    pub fn arms(&self) -> &[[f64; 4]; 2] {
        &self.q
    }

    /// The eight values in `(z, a, y)` lexicographic order.
    pub fn flat(&self) -> [f64; NUM_CELLS] {
        let mut out = [0.0; NUM_CELLS];
        for z in 0..2 {
            out[4 * z..4 * z + 4].copy_from_slice(&self.q[z]);
        }
        out
    }
}

/// Per-arm plug-in proportions `n[z][a][y] / n_z`.
pub fn empirical_proportions(counts: &CountsTable) -> Result<ObservableDist> {
    counts.require_both_arms()?;
    let mut q = [[0.0; 4]; 2];
    for z in 0..2u8 {
        let total = counts.arm_total(z) as f64;
        let arm = &mut q[z as usize];
        for (c, &n) in counts.arm(z).iter().enumerate() {
            arm[c] = n as f64 / total;
        }
        let s: f64 = arm.iter().sum();
        arm.iter_mut().for_each(|x| *x /= s);
    }
    Ok(ObservableDist::from_raw(q))
}

/// Probabilities of the 16 principal strata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumVector {
    p: [f64; NUM_STRATA],
}

impl StratumVector {
    const SUM_TOL: f64 = 1e-9;

    pub fn new(p: [f64; NUM_STRATA]) -> Result<Self> {
        if p.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::InvalidValue("negative stratum probability".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidValue(format!("strata sum to {s}, not 1")));
        }
        Ok(Self { p })
    }

    pub fn uniform() -> Self {
        Self {
            p: [1.0 / NUM_STRATA as f64; NUM_STRATA],
        }
    }

    pub fn get(&self, s: Stratum) -> f64 {
        self.p[s.index()]
    }

    pub fn as_array(&self) -> &[f64; NUM_STRATA] {
        &self.p
    }

    /// Total mass of one compliance type.
    pub fn compliance_mass(&self, c: Compliance) -> f64 {
        Stratum::all()
            .filter(|s| s.compliance() == c)
            .map(|s| self.get(s))
            .sum()
    }
}

/// Map latent strata to the observable distribution they induce.
pub fn observable_map(p: &StratumVector) -> ObservableDist {
    let mut q = [[0.0; 4]; 2];
    for s in Stratum::all() {
        for z in 0..2u8 {
            q[z as usize][s.observed_cell(z)] += p.get(s);
        }
    }
    ObservableDist::from_raw(q)
}

/// Group membership matrix: `group_matrix()[4z + c][s] == 1.0` iff stratum
/// `s` contributes to cell `c` of arm `z`.
pub fn group_matrix() -> [[f64; NUM_STRATA]; NUM_CELLS] {
    let mut g = [[0.0; NUM_STRATA]; NUM_CELLS];
    for s in Stratum::all() {
        for z in 0..2u8 {
            g[4 * z as usize + s.observed_cell(z)][s.index()] = 1.0;
        }
    }
    g
}

/// One fiducial proposal: per arm, the slack `V*_z` and cell lower bounds `V*_zay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiducialDraw {
    pub slack: [f64; 2],
    pub v: [[f64; 4]; 2],
}

impl FiducialDraw {
    pub fn new(slack: [f64; 2], v: [[f64; 4]; 2]) -> Result<Self> {
        for z in 0..2 {
            if slack[z] < 0.0 || v[z].iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidValue(format!("arm {z} has a negative component")));
            }
            let s = slack[z] + v[z].iter().sum::<f64>();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidValue(format!("arm {z} sums to {s}, not 1")));
            }
        }
        Ok(Self { slack, v })
    }

    /// A draw with zero slack whose cell bounds equal `q`; its feasible
    /// region is exactly the set of strata reproducing `q`.
    pub fn exact(q: &ObservableDist) -> Self {
        Self {
            slack: [0.0; 2],
            v: *q.arms(),
        }
    }

    /// Lower bounds in `(z, a, y)` lexicographic order.
    pub fn flat(&self) -> [f64; NUM_CELLS] {
        let mut out = [0.0; NUM_CELLS];
        for z in 0..2 {
            out[4 * z..4 * z + 4].copy_from_slice(&self.v[z]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimandKind {
    Ate,
    Cace,
    Nudge,
    NeverTakerAce,
    AlwaysTakerAce,
    DefierAce,
}

impl EstimandKind {
    pub const ALL: [EstimandKind; 6] = [
        EstimandKind::Ate,
        EstimandKind::Cace,
        EstimandKind::Nudge,
        EstimandKind::NeverTakerAce,
        EstimandKind::AlwaysTakerAce,
        EstimandKind::DefierAce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimandKind::Ate => "ate",
            EstimandKind::Cace => "cace",
            EstimandKind::Nudge => "nudge",
            EstimandKind::NeverTakerAce => "never-taker-ace",
            EstimandKind::AlwaysTakerAce => "always-taker-ace",
            EstimandKind::DefierAce => "defier-ace",
        }
    }
}

impl fmt::Display for EstimandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for EstimandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "ate" => EstimandKind::Ate,
            "cace" | "complier-ace" | "late" => EstimandKind::Cace,
            "nudge" | "nudge-ate" => EstimandKind::Nudge,
            "never-taker-ace" | "never-taker" | "nt-ace" => EstimandKind::NeverTakerAce,
            "always-taker-ace" | "always-taker" | "at-ace" => EstimandKind::AlwaysTakerAce,
            "defier-ace" | "defier" => EstimandKind::DefierAce,
            _ => return Err(Error::UnknownEstimand(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Denominator {
    /// Linear estimand.
    One,
    /// Indicator coefficients selecting the conditioning strata.
    Strata([f64; NUM_STRATA]),
}

/// A causal estimand as `numerator . p / denominator . p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimand {
    pub kind: EstimandKind,
    pub numerator: [f64; NUM_STRATA],
    pub denominator: Denominator,
}

impl Estimand {
    pub fn is_linear(&self) -> bool {
        matches!(self.denominator, Denominator::One)
    }

    /// Denominator coefficients, all ones for a linear estimand.
    pub fn denominator_coefficients(&self) -> [f64; NUM_STRATA] {
        match self.denominator {
            Denominator::One => [1.0; NUM_STRATA],
            Denominator::Strata(d) => d,
        }
    }

    /// Value at `p`; `None` when the conditioning mass is zero.
    pub fn evaluate(&self, p: &StratumVector) -> Option<f64> {
        let dot = |c: &[f64; NUM_STRATA]| -> f64 {
            c.iter().zip(p.as_array()).map(|(a, b)| a * b).sum()
        };
        let num = dot(&self.numerator);
        match &self.denominator {
            Denominator::One => Some(num),
            Denominator::Strata(d) => {
                let den = dot(d);
                (den > 0.0).then(|| num / den)
            }
        }
    }
}

/// `+1` on strata with `Y0=0, Y1=1`, `-1` on `Y0=1, Y1=0`, restricted to `keep`.
fn effect_coefficients(keep: impl Fn(Compliance) -> bool) -> [f64; NUM_STRATA] {
    let mut c = [0.0; NUM_STRATA];
    for s in Stratum::all().filter(|s| keep(s.compliance())) {
        c[s.index()] = match (s.y0(), s.y1()) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        };
    }
    c
}

fn indicator(keep: impl Fn(Compliance) -> bool) -> [f64; NUM_STRATA] {
    let mut c = [0.0; NUM_STRATA];
    for s in Stratum::all().filter(|s| keep(s.compliance())) {
        c[s.index()] = 1.0;
    }
    c
}

/// Coefficient vectors for a supported estimand.
pub fn estimand(kind: EstimandKind) -> Estimand {
    let within = |target: Compliance| move |c: Compliance| c == target;
    let (numerator, denominator) = match kind {
        EstimandKind::Ate => (effect_coefficients(|_| true), Denominator::One),
        EstimandKind::Nudge => {
            let manipulable = |c| matches!(c, Compliance::Complier | Compliance::Defier);
            (
                effect_coefficients(manipulable),
                Denominator::Strata(indicator(manipulable)),
            )
        }
        EstimandKind::Cace => (
            effect_coefficients(within(Compliance::Complier)),
            Denominator::Strata(indicator(within(Compliance::Complier))),
        ),
        EstimandKind::NeverTakerAce => (
            effect_coefficients(within(Compliance::NeverTaker)),
            Denominator::Strata(indicator(within(Compliance::NeverTaker))),
        ),
        EstimandKind::AlwaysTakerAce => (
            effect_coefficients(within(Compliance::AlwaysTaker)),
            Denominator::Strata(indicator(within(Compliance::AlwaysTaker))),
        ),
        EstimandKind::DefierAce => (
            effect_coefficients(within(Compliance::Defier)),
            Denominator::Strata(indicator(within(Compliance::Defier))),
        ),
    };
    Estimand {
        kind,
        numerator,
        denominator,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionLabel {
    CoreIv,
    Monotonicity,
    NewDrug,
}

impl AssumptionLabel {
    pub const ALL: [AssumptionLabel; 3] = [
        AssumptionLabel::CoreIv,
        AssumptionLabel::Monotonicity,
        AssumptionLabel::NewDrug,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssumptionLabel::CoreIv => "core",
            AssumptionLabel::Monotonicity => "monotonicity",
            AssumptionLabel::NewDrug => "new-drug",
        }
    }
}

impl fmt::Display for AssumptionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for AssumptionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "core" | "core-iv" | "iv" => AssumptionLabel::CoreIv,
            "monotonicity" | "monotone" | "no-defiers" => AssumptionLabel::Monotonicity,
            "new-drug" | "newdrug" => AssumptionLabel::NewDrug,
            _ => return Err(Error::UnknownAssumptions(s.to_string())),
        })
    }
}

/// Which strata are forced to zero on top of the core IV assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssumptionSet {
    pub label: AssumptionLabel,
    forced_zero: [bool; NUM_STRATA],
}

impl AssumptionSet {
    pub fn new(label: AssumptionLabel) -> Self {
        let mut forced_zero = [false; NUM_STRATA];
        for s in Stratum::all() {
            forced_zero[s.index()] = match label {
                AssumptionLabel::CoreIv => false,
                AssumptionLabel::Monotonicity => s.compliance() == Compliance::Defier,
                AssumptionLabel::NewDrug => s.a0() == 1,
            };
        }
        Self { label, forced_zero }
    }

    pub fn core() -> Self {
        Self::new(AssumptionLabel::CoreIv)
    }

    pub fn monotonicity() -> Self {
        Self::new(AssumptionLabel::Monotonicity)
    }

    pub fn new_drug() -> Self {
        Self::new(AssumptionLabel::NewDrug)
    }

    pub fn is_forced_zero(&self, s: Stratum) -> bool {
        self.forced_zero[s.index()]
    }

    pub fn forced_zero(&self) -> impl Iterator<Item = Stratum> + '_ {
        Stratum::all().filter(|s| self.is_forced_zero(*s))
    }

    pub fn free_strata(&self) -> Vec<Stratum> {
        Stratum::all().filter(|s| !self.is_forced_zero(*s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(z: u8, a: u8, y: u8) -> TrialRecord {
        TrialRecord::new(z, a, y).unwrap()
    }

    #[test]
    fn summarize_tallies_cells() {
        let counts = summarize(&[rec(0, 0, 0), rec(0, 0, 0), rec(1, 1, 1)]).unwrap();
        assert_eq!(counts.get(0, 0, 0), 2);
        assert_eq!(counts.get(1, 1, 1), 1);
        assert_eq!(counts.total(), 3);
        assert_eq!(counts.arm(0), &[2, 0, 0, 0]);
        assert_eq!(counts.arm(1), &[0, 0, 0, 1]);
    }

    #[test]
    fn summarize_rejects_empty_and_one_armed_data() {
        assert_eq!(summarize(&[]), Err(Error::EmptyData));
        assert_eq!(
            summarize(&[rec(1, 0, 0), rec(1, 1, 0)]),
            Err(Error::MissingArm { arm: 0 })
        );
        assert_eq!(summarize(&[rec(0, 0, 0)]), Err(Error::MissingArm { arm: 1 }));
    }

    #[test]
    fn record_values_must_be_binary() {
        assert!(TrialRecord::new(2, 0, 0).is_err());
        assert!(TrialRecord::new(0, 0, 1).is_ok());
    }

    #[test]
    fn proportions_renormalize_per_arm() {
        let q = empirical_proportions(&CountsTable::new([[1, 1, 1, 1], [2, 0, 0, 2]])).unwrap();
        assert_eq!(q.arms()[0], [0.25; 4]);
        assert_eq!(q.arms()[1], [0.5, 0.0, 0.0, 0.5]);

        let q = empirical_proportions(&CountsTable::new([[4, 0, 0, 0], [0, 0, 0, 4]])).unwrap();
        assert_eq!(q.arms()[0], [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q.arms()[1], [0.0, 0.0, 0.0, 1.0]);

        assert_eq!(
            empirical_proportions(&CountsTable::new([[0; 4], [1, 0, 0, 0]])),
            Err(Error::MissingArm { arm: 0 })
        );
    }

    #[test]
    fn uniform_strata_map_to_uniform_cells() {
        let q = observable_map(&StratumVector::uniform());
        for arm in q.arms() {
            for &x in arm {
                assert!((x - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn never_taker_without_effect_lands_in_first_cell() {
        let mut p = [0.0; NUM_STRATA];
        p[Stratum::from_bits(0, 0, 0, 0).index()] = 1.0;
        let q = observable_map(&StratumVector::new(p).unwrap());
        assert_eq!(q.arms()[0], [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q.arms()[1], [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn stratum_indexing_is_lexicographic() {
        assert_eq!(Stratum::from_bits(0, 0, 0, 0).index(), 0);
        assert_eq!(Stratum::from_bits(0, 1, 1, 0).index(), 6);
        assert_eq!(Stratum::from_bits(1, 1, 1, 1).index(), 15);
        assert_eq!(Stratum::new(6).to_string(), "p01,10");
        assert_eq!(Stratum::new(6).compliance(), Compliance::Complier);
    }

    #[test]
    fn ate_coefficients() {
        let e = estimand(EstimandKind::Ate);
        assert!(e.is_linear());
        for s in Stratum::all() {
            let expect = match (s.y0(), s.y1()) {
                (0, 1) => 1.0,
                (1, 0) => -1.0,
                _ => 0.0,
            };
            assert_eq!(e.numerator[s.index()], expect, "{s}");
        }
        assert_eq!(e.numerator.iter().filter(|&&c| c == 1.0).count(), 4);
        assert_eq!(e.numerator.iter().filter(|&&c| c == -1.0).count(), 4);
    }

    #[test]
    fn cace_and_nudge_coefficients() {
        let cace = estimand(EstimandKind::Cace);
        let num_nonzero: Vec<(usize, f64)> = cace
            .numerator
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (i, c))
            .collect();
        assert_eq!(
            num_nonzero,
            vec![
                (Stratum::from_bits(0, 1, 0, 1).index(), 1.0),
                (Stratum::from_bits(0, 1, 1, 0).index(), -1.0)
            ]
        );
        let Denominator::Strata(d) = cace.denominator else {
            panic!("CACE must be fractional")
        };
        assert_eq!(d.iter().sum::<f64>(), 4.0);
        for s in Stratum::all() {
            assert_eq!(d[s.index()] == 1.0, s.compliance() == Compliance::Complier);
        }

        let nudge = estimand(EstimandKind::Nudge);
        let Denominator::Strata(d) = nudge.denominator else {
            panic!("nudge must be fractional")
        };
        assert_eq!(d.iter().sum::<f64>(), 8.0);
        assert_eq!(nudge.numerator.iter().map(|c| c.abs()).sum::<f64>(), 4.0);
        assert_eq!(nudge.numerator[Stratum::from_bits(1, 0, 0, 1).index()], 1.0);
        assert_eq!(nudge.numerator[Stratum::from_bits(1, 0, 1, 0).index()], -1.0);
    }

    #[test]
    fn fractional_denominators_select_compliance_types() {
        for kind in EstimandKind::ALL {
            let e = estimand(kind);
            if let Denominator::Strata(d) = e.denominator {
                assert!(d.iter().all(|&x| x == 0.0 || x == 1.0));
                let types: std::collections::HashSet<_> = Stratum::all()
                    .filter(|s| d[s.index()] == 1.0)
                    .map(|s| s.compliance())
                    .collect();
                let expect = if kind == EstimandKind::Nudge { 2 } else { 1 };
                assert_eq!(types.len(), expect, "{kind}");
                for s in Stratum::all() {
                    if e.numerator[s.index()] != 0.0 {
                        assert_eq!(d[s.index()], 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn estimand_names_round_trip() {
        for kind in EstimandKind::ALL {
            assert_eq!(kind.name().parse::<EstimandKind>().unwrap(), kind);
        }
        assert!(matches!(
            "att".parse::<EstimandKind>(),
            Err(Error::UnknownEstimand(_))
        ));
        for label in AssumptionLabel::ALL {
            assert_eq!(label.name().parse::<AssumptionLabel>().unwrap(), label);
        }
    }

    #[test]
    fn assumption_sets_force_expected_strata() {
        assert_eq!(AssumptionSet::core().forced_zero().count(), 0);
        let mono: Vec<_> = AssumptionSet::monotonicity().forced_zero().collect();
        assert_eq!(mono.len(), 4);
        assert!(mono.iter().all(|s| s.a0() == 1 && s.a1() == 0));
        let nd: Vec<_> = AssumptionSet::new_drug().forced_zero().collect();
        assert_eq!(nd.len(), 8);
        assert!(nd
            .iter()
            .all(|s| matches!(s.compliance(), Compliance::Defier | Compliance::AlwaysTaker)));
    }

    #[test]
    fn draw_validation() {
        assert!(FiducialDraw::new([0.5, 1.0], [[0.5, 0.0, 0.0, 0.0], [0.0; 4]]).is_ok());
        assert!(FiducialDraw::new([0.5, 1.0], [[0.6, 0.0, 0.0, 0.0], [0.0; 4]]).is_err());
        assert!(FiducialDraw::new([1.5, 1.0], [[-0.5, 0.0, 0.0, 0.0], [0.0; 4]]).is_err());
    }
}
