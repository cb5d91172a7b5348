//! Leaderboard in the layout of the published accuracy table.

use costlab_core::{EvalReport, Error, ModelKind};

use crate::config::Format;

pub const COLUMNS: [&str; 7] = [
    "Notation",
    "Algorithm / model",
    "Algorithm type",
    "MAPE %",
    "MAPE % categorization",
    "R²",
    "R*²",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok(EvalReport),
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub notation: String,
    pub kind: ModelKind,
    pub outcome: Outcome,
}

/// Rows sorted by ascending MAPE; failed models follow, by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Leaderboard {
    pub rows: Vec<Row>,
}

impl Leaderboard {
    pub fn from_outcomes(mut outcomes: Vec<(ModelKind, Outcome)>) -> Self {
        outcomes.sort_by(|(ka, a), (kb, b)| match (a, b) {
            (Outcome::Ok(x), Outcome::Ok(y)) => x.mape_pct.total_cmp(&y.mape_pct).then(ka.id().cmp(kb.id())),
            (Outcome::Ok(_), Outcome::Failed(_)) => std::cmp::Ordering::Less,
            (Outcome::Failed(_), Outcome::Ok(_)) => std::cmp::Ordering::Greater,
            _ => ka.id().cmp(kb.id()),
        });
        let rows = outcomes
            .into_iter()
            .enumerate()
            .map(|(i, (kind, outcome))| Row {
                notation: format!("M{}", i + 1),
                kind,
                outcome,
            })
            .collect();
        Leaderboard { rows }
    }

    pub fn get(&self, kind: ModelKind) -> Option<&Row> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn report(&self, kind: ModelKind) -> Option<&EvalReport> {
        match &self.get(kind)?.outcome {
            Outcome::Ok(r) => Some(r),
            Outcome::Failed(_) => None,
        }
    }
}

/// Three decimals, '.' separator, no locale involvement.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn cells(row: &Row) -> [String; 7] {
    let (mape, cat, r2, adj) = match &row.outcome {
        Outcome::Ok(r) => (fmt3(r.mape_pct), r.mape_category.label().to_string(), fmt3(r.r2), fmt3(r.adj_r2)),
        Outcome::Failed(e) => ("n/a".into(), format!("error: {}", e.class()), "n/a".into(), "n/a".into()),
    };
    [
        row.notation.clone(),
        row.kind.display_name().to_string(),
        row.kind.family().to_string(),
        mape,
        cat,
        r2,
        adj,
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(lb: &Leaderboard, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&COLUMNS.map(csv_field).join(","));
            out.push('\n');
            for row in &lb.rows {
                out.push_str(&cells(row).map(|c| csv_field(&c)).join(","));
                out.push('\n');
            }
        }
        Format::Markdown => {
            out.push_str(&format!("| {} |\n", COLUMNS.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(COLUMNS.len())));
            for row in &lb.rows {
                out.push_str(&format!("| {} |\n", cells(row).join(" | ")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use costlab_core::metrics::MapeCategory;

    fn report(id: &str, mape: f64, r2: f64, adj: f64) -> EvalReport {
        EvalReport {
            model_id: id.into(),
            mape_pct: mape,
            mape_category: costlab_core::metrics::categorize(mape).unwrap(),
            r2,
            adj_r2: adj,
            n: 144,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let lb = Leaderboard::default();
        assert_eq!(render(&lb, Format::Csv).lines().count(), 1);
        assert_eq!(render(&lb, Format::Markdown).lines().count(), 2);
    }

    #[test]
    fn xgboost_row() {
        let lb = Leaderboard::from_outcomes(vec![(ModelKind::Xgboost, Outcome::Ok(report("xgboost", 9.091, 0.931, 0.929)))]);
        let csv = render(&lb, Format::Csv);
        assert_eq!(csv.lines().nth(1).unwrap(), "M1,XGBoost,Ensemble methods,9.091,below 10,0.931,0.929");
        assert_eq!(report("x", 9.091, 0.0, 0.0).mape_category, MapeCategory::Below10);
    }

    #[test]
    fn formats_share_numbers() {
        let lb = Leaderboard::from_outcomes(vec![
            (ModelKind::Cbr, Outcome::Ok(report("cbr", 17.3, 0.859, 0.852))),
            (ModelKind::Svr, Outcome::Ok(report("svr", 21.2174, 0.136, 0.1334))),
            (ModelKind::Fuzzy, Outcome::Failed(Error::ZeroSst)),
        ]);
        let csv = render(&lb, Format::Csv);
        let md = render(&lb, Format::Markdown);
        for n in ["17.300", "0.859", "0.852", "21.217", "0.136", "0.133"] {
            assert!(csv.contains(n) && md.contains(n), "{n}");
        }
        assert!(csv.contains("error: ZERO_SST"));
        assert_eq!(lb.rows[2].kind, ModelKind::Fuzzy);
    }

    #[test]
    fn sorted_by_mape() {
        let lb = Leaderboard::from_outcomes(vec![
            (ModelKind::Svr, Outcome::Ok(report("svr", 21.0, 0.1, 0.1))),
            (ModelKind::Cbr, Outcome::Ok(report("cbr", 17.0, 0.8, 0.8))),
        ]);
        assert_eq!(lb.rows[0].kind, ModelKind::Cbr);
        assert_eq!(lb.rows[1].notation, "M2");
    }

    #[test]
    fn negative_zero_prints_plain() {
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(1.23456), "1.235");
    }
}
