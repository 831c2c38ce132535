//! Report rows, the quantity vocabulary and CSV emission.

use std::cmp::Ordering;
use std::io::Write;

use super::config::ExperimentId;
use super::fit::RateFit;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = ["experiment", "k", "n_grid", "m_trunc", "d_sys", "t", "quantity", "value", "meta"];

/// Quantities each experiment may emit. Every experiment may also emit the
/// `rate_*` fit rows.
pub fn vocabulary(id: ExperimentId) -> &'static [&'static str] {
    match id {
        ExperimentId::Slh => &[
            "s_re",
            "s_im",
            "l_re",
            "l_im",
            "h_re",
            "h_im",
            "isometry_residual",
            "coisometry_residual",
            "random_count",
            "random_roundtrip_max",
            "random_unitarity_max",
        ],
        ExperimentId::FirstQuantized => &["sup_error", "baseline_sup_error", "baseline_ratio"],
        ExperimentId::GraphRate => &["graph_residual", "smoothing_residual", "control_graph_residual"],
        ExperimentId::Lemma7Rate => &[
            "pairing_norm",
            "pairing_norm_times_k",
            "kappa_sum_defect",
            "kappa_conjugacy_defect",
            "kappa_sigma",
            "normalization_constant",
            "normalization_defect",
        ],
        ExperimentId::FockIdentities => &[
            "lemma10_residual",
            "lemma13_residual",
            "rho_quadrature_gap",
            "lemma9_distance_sqr",
            "lemma9_formula",
            "lemma9_gap",
            "lemma9_tail_bound",
            "ccr_residual",
            "adjoint_residual",
            "exponential_tail",
        ],
        ExperimentId::PseudoRate => &[
            "boundary_residual",
            "boundary_identity_residual",
            "control_boundary_residual",
            "lemma12_residual",
            "lemma11_norm",
        ],
        ExperimentId::WeakConvergence => &[
            "weak_error",
            "fock_element_re",
            "fock_element_im",
            "oracle_element_re",
            "oracle_element_im",
            "leakage",
            "dropped_fraction",
            "baseline_weak_error",
        ],
        ExperimentId::Cocycle => &["zero_generator_defect", "vacuum_defect", "cocycle_residual", "contraction_margin"],
    }
}

pub const FIT_QUANTITIES: [&str; 3] = ["rate_slope", "rate_intercept", "rate_r2"];

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub experiment: ExperimentId,
    pub k: Option<f64>,
    pub n_grid: Option<usize>,
    pub m_trunc: Option<usize>,
    pub d_sys: usize,
    pub t: Option<f64>,
    pub quantity: &'static str,
    pub value: f64,
    pub meta: String,
}

/// Rows accumulated by one experiment run, plus the fits behind any plot.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: ExperimentId,
    pub d_sys: usize,
    pub n_grid: Option<usize>,
    pub m_trunc: Option<usize>,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<(String, RateFit)>,
}

impl Report {
    pub fn new(experiment: ExperimentId, d_sys: usize, n_grid: Option<usize>, m_trunc: Option<usize>) -> Self {
        Report {
            experiment,
            d_sys,
            n_grid,
            m_trunc,
            rows: Vec::new(),
            fits: Vec::new(),
        }
    }

    pub fn push(&mut self, k: Option<f64>, t: Option<f64>, quantity: &'static str, value: f64, meta: impl Into<String>) -> Result<()> {
        if !vocabulary(self.experiment).contains(&quantity) && !FIT_QUANTITIES.contains(&quantity) {
            return Err(Error::Consistency(format!("quantity '{quantity}' is not in the {} vocabulary", self.experiment)));
        }
        self.rows.push(ReportRow {
            experiment: self.experiment,
            k,
            n_grid: self.n_grid,
            m_trunc: self.m_trunc,
            d_sys: self.d_sys,
            t,
            quantity,
            value,
            meta: meta.into(),
        });
        Ok(())
    }

    /// Adds the slope, intercept and r² rows of a fit labelled `label`.
    pub fn push_fit(&mut self, label: &str, fit: RateFit) -> Result<()> {
        let meta = format!("fit={label}");
        self.push(None, None, "rate_slope", fit.slope, meta.clone())?;
        self.push(None, None, "rate_intercept", fit.intercept, meta.clone())?;
        self.push(None, None, "rate_r2", fit.r2, meta)?;
        self.fits.push((label.to_string(), fit));
        Ok(())
    }

    /// Rows in the emission order `(experiment, k, t)`, stable otherwise.
    pub fn sorted_rows(&self) -> Vec<ReportRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(row_order);
        rows
    }

    /// Rows with the given quantity, in emission order.
    pub fn values(&self, quantity: &str) -> Vec<&ReportRow> {
        let mut rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.quantity == quantity).collect();
        rows.sort_by(|a, b| row_order(a, b));
        rows
    }

    pub fn fit(&self, label: &str) -> Option<&RateFit> {
        self.fits.iter().find(|(l, _)| l == label).map(|(_, f)| f)
    }
}

fn option_order(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(&y),
    }
}

fn row_order(a: &ReportRow, b: &ReportRow) -> Ordering {
    a.experiment
        .cmp(&b.experiment)
        .then(option_order(a.k, b.k))
        .then(option_order(a.t, b.t))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the CSV; numbers use the shortest round-trip representation.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("report has no rows".into()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.experiment.as_str().to_string(),
            opt(r.k),
            opt(r.n_grid),
            opt(r.m_trunc),
            r.d_sys.to_string(),
            opt(r.t),
            r.quantity.to_string(),
            r.value.to_string(),
            r.meta.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::other(e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_gives_header_plus_line() {
        let mut r = Report::new(ExperimentId::Slh, 1, None, None);
        r.push(None, None, "s_re", 0.0, "").unwrap();
        let text = csv_string(&r.sorted_rows()).unwrap();
        assert_eq!(text, "experiment,k,n_grid,m_trunc,d_sys,t,quantity,value,meta\nslh,,,,1,,s_re,0,\n");
    }

    #[test]
    fn rejects_foreign_quantities() {
        let mut r = Report::new(ExperimentId::Slh, 1, None, None);
        assert!(r.push(None, None, "weak_error", 1.0, "").is_err());
    }

    #[test]
    fn sorts_by_k_then_t() {
        let mut r = Report::new(ExperimentId::WeakConvergence, 1, Some(64), Some(2));
        r.push(Some(4.0), Some(0.5), "weak_error", 3.0, "").unwrap();
        r.push(Some(1.0), Some(0.5), "weak_error", 2.0, "").unwrap();
        r.push(Some(1.0), Some(0.25), "weak_error", 1.0, "").unwrap();
        let v: Vec<f64> = r.sorted_rows().iter().map(|x| x.value).collect();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_report_is_rejected() {
        assert!(csv_string(&[]).is_err());
    }
}
