//! Text renderings of claim results and trend reports. Every emitter is a
//! pure function of its input, so equal runs give byte-identical output.

use std::fmt::Write as _;

use serde::Serialize;

use super::eval::{ClaimResult, Verdict};
use super::trend::TrendReport;

fn json_lines<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    }
    out
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn md_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn approx(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

const RESULT_COLUMNS: &[&str] = &[
    "schema",
    "claim",
    "exactness",
    "family",
    "seed",
    "n",
    "set_digest",
    "lhs",
    "rhs",
    "ratio_lo",
    "ratio_hi",
    "ratio_approx",
    "constant",
    "verdict",
    "reason",
    "details",
    "runtime_ms",
];

fn result_row(r: &ClaimResult) -> Vec<String> {
    let details: Vec<String> = r.details.iter().map(|(k, v)| format!("{k}={v}")).collect();
    vec![
        r.schema.clone(),
        r.claim.clone(),
        label(&r.exactness),
        r.family.clone(),
        r.seed.to_string(),
        r.n.to_string(),
        r.set_digest.clone(),
        opt(&r.lhs),
        opt(&r.rhs),
        opt(&r.ratio.as_ref().map(|i| i.lo().clone())),
        opt(&r.ratio.as_ref().map(|i| i.hi().clone())),
        approx(r.ratio_approx),
        opt(&r.constant),
        label(&r.verdict),
        opt(&r.reason),
        details.join("; "),
        opt(&r.runtime_ms),
    ]
}

pub fn results_json_lines(results: &[ClaimResult]) -> String {
    json_lines(results)
}

pub fn results_csv(results: &[ClaimResult]) -> String {
    csv_table(RESULT_COLUMNS, results.iter().map(result_row))
}

pub fn results_markdown(results: &[ClaimResult]) -> String {
    let header = ["claim", "family", "n", "lhs", "rhs", "ratio ≈", "constant", "verdict", "reason"];
    md_table(
        &header,
        results.iter().map(|r| {
            vec![
                r.claim.clone(),
                r.family.clone(),
                r.n.to_string(),
                opt(&r.lhs),
                opt(&r.rhs),
                approx(r.ratio_approx),
                opt(&r.constant),
                label(&r.verdict),
                opt(&r.reason),
            ]
        }),
    )
}

const TREND_COLUMNS: &[&str] = &[
    "schema",
    "claim",
    "exactness",
    "family",
    "seed",
    "sizes",
    "slope",
    "intercept",
    "r2",
    "flag",
    "bounded",
    "max_constant",
    "holds",
    "fails",
    "skipped",
];

fn trend_row(t: &TrendReport) -> Vec<String> {
    let sizes: Vec<String> = t.points.iter().map(|p| p.n.to_string()).collect();
    let f = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    vec![
        t.schema.to_string(),
        t.claim.clone(),
        label(&t.exactness),
        t.family.clone(),
        t.seed.to_string(),
        sizes.join(" "),
        f(t.slope),
        f(t.intercept),
        f(t.r2),
        label(&t.flag),
        opt(&t.bounded),
        opt(&t.max_constant),
        t.holds.to_string(),
        t.fails.to_string(),
        t.skipped.to_string(),
    ]
}

pub fn trends_json_lines(trends: &[TrendReport]) -> String {
    json_lines(trends)
}

pub fn trends_csv(trends: &[TrendReport]) -> String {
    csv_table(TREND_COLUMNS, trends.iter().map(trend_row))
}

pub fn trends_markdown(trends: &[TrendReport]) -> String {
    let rows = trends.iter().map(trend_row).map(|r| {
        // Drop the schema column.
        r.into_iter().skip(1).collect::<Vec<_>>()
    });
    md_table(&TREND_COLUMNS[1..], rows)
}

/// Plot-ready rows: `claim, family, seed, n, lhs, rhs, ratio`.
pub fn plot_csv(results: &[ClaimResult]) -> String {
    let header = ["claim", "family", "seed", "n", "lhs", "rhs", "ratio"];
    csv_table(
        &header,
        results.iter().filter(|r| r.ratio_approx.is_some()).map(|r| {
            vec![
                r.claim.clone(),
                r.family.clone(),
                r.seed.to_string(),
                r.n.to_string(),
                opt(&r.lhs),
                opt(&r.rhs),
                approx(r.ratio_approx),
            ]
        }),
    )
}

/// Tallies, the largest ratio per claim, and a line per failed exact claim.
pub fn summary(results: &[ClaimResult]) -> String {
    let count = |v: Verdict| results.iter().filter(|r| r.verdict == v).count();
    let mut out = format!(
        "{} evaluations: {} hold, {} fail, {} ratios recorded, {} skipped\n",
        results.len(),
        count(Verdict::Holds),
        count(Verdict::Fails),
        count(Verdict::RatioRecorded),
        count(Verdict::Skipped),
    );
    let mut claims: Vec<&str> = Vec::new();
    for r in results {
        if !claims.contains(&r.claim.as_str()) {
            claims.push(&r.claim);
        }
    }
    for c in claims {
        let rows: Vec<&ClaimResult> = results.iter().filter(|r| r.claim == c).collect();
        let max =
            rows.iter().filter_map(|r| r.ratio_approx).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        let _ =
            writeln!(out, "  {c}: {} rows, max ratio {}", rows.len(), max.map_or("n/a".into(), |m| format!("{m:.6e}")));
    }
    for r in results.iter().filter(|r| r.verdict == Verdict::Fails) {
        let _ =
            writeln!(out, "FAIL {} on {} (n = {}): lhs {} rhs {}", r.claim, r.family, r.n, opt(&r.lhs), opt(&r.rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::{evaluate_claim, lookup, EvalOptions, FamilySpec, Input};

    #[test]
    fn renderings_are_stable() {
        let f = FamilySpec::parse("gp:1:2", 0).unwrap();
        let rs: Vec<ClaimResult> = [4, 8]
            .iter()
            .map(|&n| evaluate_claim(lookup("elekes").unwrap(), &Input::build(&f, n).unwrap(), &EvalOptions::default()))
            .collect();
        let js = results_json_lines(&rs);
        assert_eq!(js.lines().count(), 2);
        let row: serde_json::Value = serde_json::from_str(js.lines().next().unwrap()).unwrap();
        assert_eq!(row["claim"], "elekes");
        assert_eq!(row["verdict"], "ratio-recorded");
        assert!(row.get("runtime_ms").is_none());
        let csv = results_csv(&rs);
        assert!(csv.starts_with("schema,claim,exactness"));
        assert_eq!(csv.lines().count(), 3);
        assert!(results_markdown(&rs).contains("| elekes | gp:1:2 | 8 |"));
        assert_eq!(results_csv(&rs), csv);
        assert!(summary(&rs).starts_with("2 evaluations: 0 hold, 0 fail, 2 ratios recorded"));
        assert!(summary(&rs).contains("elekes: 2 rows, max ratio"));
        assert_eq!(plot_csv(&rs).lines().next(), Some("claim,family,seed,n,lhs,rhs,ratio"));
        let back: Vec<ClaimResult> = js.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, rs);
    }
}
