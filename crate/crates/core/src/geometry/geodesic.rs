use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::mobius::MobiusMap;
use super::word::Word;
use crate::error::{invalid, Error, Result};

/// The closed geodesic of a hyperbolic conjugacy class, lifted to the axis of
/// a representative word and parametrized by arc length from `base_point`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedGeodesic {
    pub word: Word,
    pub trace: f64,
    pub length: f64,
    /// `(repelling, attracting)` fixed points of the word matrix.
    pub axis_endpoints: (f64, f64),
    pub base_point: C64,
    pub matrix: MobiusMap,
}

impl ClosedGeodesic {
    pub fn from_word(word: Word, matrix: MobiusMap) -> Result<Self> {
        let (rep, att) = matrix.axis_endpoints()?;
        let trace = matrix.trace();
        let length = 2.0 * (trace.abs() / 2.0).acosh();
        let base_point = C64::new(0.5 * (rep + att), 0.5 * (att - rep).abs());
        Ok(Self {
            word,
            trace,
            length,
            axis_endpoints: (rep, att),
            base_point,
            matrix,
        })
    }

    /// Maps `0 ↦ repelling`, `∞ ↦ attracting`, `i ↦ base_point`.
    fn normalizer(&self) -> (f64, f64, f64, f64) {
        let (rep, att) = self.axis_endpoints;
        if att > rep {
            (att, rep, 1.0, 1.0)
        } else {
            (-att, rep, -1.0, 1.0)
        }
    }

    /// Position and unit tangent at arc length `t`, without range checks.
    pub fn point_at(&self, t: f64) -> (C64, C64) {
        let (a, b, c, d) = self.normalizer();
        let w = C64::new(0.0, t.exp());
        let q = w * c + d;
        let z = (w * a + b) / q;
        let det = a * d - b * c;
        // derivative of the normalizer times the velocity i·e^t of i·e^t
        let v = w * det / (q * q);
        (z, v)
    }

    /// Same as [`point_at`](Self::point_at) restricted to one period.
    pub fn geodesic_arc(&self, t: f64) -> Result<(C64, C64)> {
        if !(0.0..=self.length).contains(&t) {
            return invalid(format!("arc parameter {t} outside [0, {}]", self.length));
        }
        Ok(self.point_at(t))
    }

    /// The same geodesic traversed backwards (the class of the inverse word).
    pub fn reversed(&self) -> Self {
        let (rep, att) = self.axis_endpoints;
        let matrix = self.matrix.inverse();
        Self {
            word: self.word.inverse(),
            trace: matrix.trace(),
            length: self.length,
            axis_endpoints: (att, rep),
            base_point: self.base_point,
            matrix,
        }
    }
}

/// CSV with columns `word, trace, length, repelling, attracting`.
pub fn write_geodesics_csv<W: std::io::Write>(geodesics: &[ClosedGeodesic], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["word", "trace", "length", "repelling", "attracting"])
        .map_err(fmt)?;
    for g in geodesics {
        let (rep, att) = g.axis_endpoints;
        w.write_record([
            g.word.to_string(),
            format!("{:e}", g.trace),
            format!("{:e}", g.length),
            format!("{rep:e}"),
            format!("{att:e}"),
        ])
        .map_err(fmt)?;
    }
    w.flush()?;
    Ok(())
}
