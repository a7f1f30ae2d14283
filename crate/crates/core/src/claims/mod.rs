//! Evaluable statements about finite sets, the families they are evaluated
//! on, and the analysis of their ratios along a family.
//!
//! Every claim compares a left-hand side with a right-hand side. Exact claims
//! are decided by integer arithmetic. Constant-bounded claims hold up to an
//! unknown absolute constant, so each evaluation records the constant it would
//! need; trend-only claims hide logarithmic factors and only their ratio is
//! reported.

mod config;
mod eval;
mod family;
mod quantity;
mod report;
mod trend;

use serde::{Deserialize, Serialize};

pub use config::{Budgets, RunConfig, SuiteConfig};
pub use eval::{evaluate_claim, run_suite, ClaimResult, EvalOptions, Input, Job, Verdict};
pub use family::{FamilyKind, FamilySpec, GenSet, SizeRange, SUBGROUP_MAX_PRIME};
pub use report::{
    plot_csv, results_csv, results_json_lines, results_markdown, summary, trends_csv, trends_json_lines,
    trends_markdown,
};
pub use trend::{
    boundedness, fit_loglog, trend, trends_by_series, TrendFlag, TrendReport, BOUNDED_SLACK, SLOPE_THRESHOLD,
};

use crate::error::{Error, Result};

/// Version tag carried by every report row.
pub const SCHEMA: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    ExactIdentity,
    ExactInequality,
    ConstantBounded,
    TrendOnly,
}

impl Exactness {
    pub fn is_exact(self) -> bool {
        matches!(self, Exactness::ExactIdentity | Exactness::ExactInequality)
    }
}

/// How the two sides compare. `Upper`: `lhs ≪ rhs`, the constant is
/// `lhs/rhs`. `Lower`: `lhs ≫ rhs`, the constant is `rhs/lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Equal,
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Rational,
    PrimeField,
    Both,
}

impl Domain {
    pub fn accepts(self, family: &FamilySpec) -> bool {
        match self {
            Domain::Both => true,
            Domain::Rational => !family.is_prime_field(),
            Domain::PrimeField => family.is_prime_field(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimSpec {
    pub id: &'static str,
    /// Name of the result the claim encodes.
    pub citation: &'static str,
    pub statement: &'static str,
    pub exactness: Exactness,
    pub direction: Direction,
    pub domain: Domain,
    /// Sizes used when a run does not specify any.
    pub default_sizes: &'static str,
}

macro_rules! claim {
    ($id:literal, $cite:literal, $stmt:literal, $ex:ident, $dir:ident, $dom:ident, $sizes:literal) => {
        ClaimSpec {
            id: $id,
            citation: $cite,
            statement: $stmt,
            exactness: Exactness::$ex,
            direction: Direction::$dir,
            domain: Domain::$dom,
            default_sizes: $sizes,
        }
    };
}

static REGISTRY: &[ClaimSpec] = &[
    claim!(
        "e_cs",
        "Cauchy–Schwarz bound for energy",
        "E(A,B) ≤ min(|A|²|B|, |A||B|², (|A||B|)^{3/2})",
        ExactInequality,
        Upper,
        Both,
        "4..64"
    ),
    claim!(
        "conv_identity",
        "energy via convolutions",
        "Σ(A∗B)² = Σ(A∘B)² = Σ(A∘A)(B∘B)",
        ExactIdentity,
        Equal,
        Both,
        "4..64"
    ),
    claim!("fiber_identity", "energy via fibers", "E×(A) = Σ_{λ∈A/A} |A_λ|²", ExactIdentity, Equal, Both, "4..64"),
    claim!(
        "t_energy",
        "collinear triples via energies",
        "T(A,B,B) = Σ_{a₁,a₂∈A} E×(B−a₁, B−a₂)",
        ExactIdentity,
        Equal,
        Rational,
        "4..32"
    ),
    claim!(
        "t_cross_ratio",
        "collinear triples via cross ratios",
        "T(A,B,C) = #{cross-ratio equalities} + 2|A∩B∩C||A||B||C| − |A∩B∩C|²",
        ExactIdentity,
        Equal,
        Rational,
        "4..16"
    ),
    claim!(
        "cs_floor",
        "Cauchy–Schwarz floor for multiplicative energy",
        "E×(A) ≥ |A|⁴/|A/A|",
        ExactInequality,
        Lower,
        Both,
        "4..64"
    ),
    claim!(
        "plunnecke",
        "Plünnecke–Ruzsa inequality",
        "|nB − mB| ≤ K^{n+m}|A|, K = |A+B|/|A|, n+m ≤ 4",
        ExactInequality,
        Upper,
        Rational,
        "4..16"
    ),
    claim!(
        "plunnecke_x",
        "Plünnecke–Ruzsa inequality, large-subset form",
        "∃X ⊆ A, |X| ≥ (1−δ)|A|: |X+kB| ≤ (K/δ)^k|X| for k = 1, 2; δ ∈ {1/2, 1/4}",
        ExactInequality,
        Upper,
        Rational,
        "4..12"
    ),
    claim!(
        "sigma_e",
        "popular-fiber lemma",
        "max_{z∈A⁻¹} Σ_{x∈zA} |zA ∩ x(zA)| ≫ E×(A)/|A|",
        ConstantBounded,
        Lower,
        Rational,
        "8..128"
    ),
    claim!("e3_m", "third energy versus M(A)", "E₃⁺(A) ≪ M̂(A)|A|³ log|A|", ConstantBounded, Upper, Rational, "8..128"),
    claim!("triples_log", "collinear triples bound", "T(A) ≪ |A|⁴ log|A|", ConstantBounded, Upper, Rational, "8..64"),
    claim!(
        "rn_t",
        "collinear triples bound, two sets",
        "T(A,B,B) ≪ |A|²|B|² log|B|, B = first ⌈|A|/2⌉ elements",
        ConstantBounded,
        Upper,
        Rational,
        "8..64"
    ),
    claim!(
        "szt",
        "Szemerédi–Trotter theorem",
        "𝓘(P,L) ≪ |P|^{2/3}|L|^{2/3} + |P| + |L| for P = (A−A)², L = ⊔_λ lines through Q_λ",
        ConstantBounded,
        Upper,
        Rational,
        "4..32"
    ),
    claim!(
        "main_5_3",
        "difference sets of sets with small quotient set",
        "|A−A|⁶|A/A|¹³ ≳ |A|²³",
        TrendOnly,
        Lower,
        Rational,
        "8..128"
    ),
    claim!(
        "e8_remark",
        "eighth multiplicative energy bound",
        "|A|⁷E×₈(A) ≲ |A/A|⁶|A−A|⁶",
        TrendOnly,
        Upper,
        Rational,
        "8..128"
    ),
    claim!(
        "elekes",
        "Elekes' inequality for quotient sets",
        "|A/A|²|A±A|² ≫ |A|⁵",
        ConstantBounded,
        Lower,
        Rational,
        "8..256"
    ),
    claim!(
        "e_m_alpha",
        "energy of shifts of sets with small product set",
        "E×(A+α) ≪ M⁴|A|² log|A|, M = min(|AA|, |A/A|)/|A|",
        ConstantBounded,
        Upper,
        Rational,
        "8..128"
    ),
    claim!(
        "product_shift_inclusion",
        "shifted product set inclusion",
        "(A+1)(A+1) ⊆ AA+A+A+1, so |AA+A+A| ≥ |(A+1)(A+1)|",
        ExactInequality,
        Upper,
        Rational,
        "4..32"
    ),
    claim!(
        "three_fold",
        "three-fold sums of dilates",
        "|A+αA+βA| ≫ |A|²/(M⁶ log|A|)",
        ConstantBounded,
        Lower,
        Rational,
        "8..64"
    ),
    claim!(
        "gowers_char",
        "Gowers norms versus energy",
        "‖A‖_{U^k} ≥ E×(A)^{2^k−k−1}|A|^{−(3·2^k−4k−4)}, k = 2, 3, 4",
        ExactInequality,
        Lower,
        Rational,
        "4..64"
    ),
    claim!(
        "k_fold_gowers",
        "iterated sumsets versus Gowers norms",
        "|2^k A|² ≫ ‖A‖_{U^{k+1}} log^{−k}|A|, k = 1, 2",
        ConstantBounded,
        Lower,
        Rational,
        "8..32"
    ),
    claim!(
        "k_fold",
        "iterated sumsets of sets with small product set",
        "|2^k A| ≫ |A|^{1+k/2} M^{−u_k} log^{−k/2}|A|, u_k = 2^k − k/2 − 1, k = 1, 2",
        ConstantBounded,
        Lower,
        Rational,
        "8..64"
    ),
    claim!("four_a_exponent", "growth exponent of 4A", "log|4A| / log|A|", TrendOnly, Lower, Rational, "8..64"),
    claim!(
        "fp_sum_prod",
        "sum-product energy bound in F_p",
        "E⁺(A,C) ≪ (|A||BC|)^{3/2}|B|^{−1/2} + M|A||BC|/|B|, M = max(|A|,|BC|), B = C = A, if |A||B||BC| ≤ p²/4",
        ConstantBounded,
        Upper,
        PrimeField,
        "8..64"
    ),
    claim!(
        "fp_shift",
        "shift intersections of sets with small product set",
        "max_{x≠0} |A ∩ (A+x)| ≪ M^{9/4}|A|^{3/4}, M = |AA|/|A|, if |AA| ≤ p^{2/3}/2",
        ConstantBounded,
        Upper,
        PrimeField,
        "8..64"
    ),
    claim!(
        "fp_shift_q",
        "shift intersections of sets with small quotient set",
        "max_{x≠0} |A ∩ (A+x)| ≪ M³|A|^{3/4}, M = |A/A|/|A|, if M⁴|A|³ ≤ p²/4",
        ConstantBounded,
        Upper,
        PrimeField,
        "8..64"
    ),
];

pub fn registry() -> &'static [ClaimSpec] {
    REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static ClaimSpec> {
    REGISTRY.iter().find(|c| c.id == id).ok_or_else(|| Error::Invalid(format!("unknown claim id {id:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_sizes_parse() {
        let mut ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), registry().len());
        for c in registry() {
            assert!(c.default_sizes.parse::<SizeRange>().is_ok(), "{}", c.id);
            let exact_dir = c.direction == Direction::Equal;
            assert_eq!(exact_dir, c.exactness == Exactness::ExactIdentity, "{}", c.id);
        }
        assert!(lookup("nope").is_err());
        assert_eq!(lookup("cs_floor").unwrap().exactness, Exactness::ExactInequality);
    }
}
