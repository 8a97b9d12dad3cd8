//! Dense linear models over sparse samples.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::data::Sample;
use crate::error::{Error, Result};

/// A linear classifier `x -> <w, x>`. Prediction uses the global tie rule
/// `sign(0) = -1`: a sample is labeled positive iff its score is `> 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub w: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel { w: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Score of a sparse sample. Indices past `dim` contribute nothing, so a
    /// model trained on a lower-dimensional split still scores wider data.
    pub fn score(&self, sample: &Sample) -> f64 {
        let mut s = 0.0;
        for &(i, v) in &sample.features {
            if let Some(wi) = self.w.get(i as usize) {
                s += wi * v;
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `w += scale * x` for a sparse `x`.
    pub fn axpy(&mut self, scale: f64, sample: &Sample) {
        for &(i, v) in &sample.features {
            let i = i as usize;
            if i < self.w.len() {
                self.w[i] += scale * v;
            }
        }
    }

    pub fn add_assign(&mut self, other: &LinearModel) {
        for (a, b) in self.w.iter_mut().zip(&other.w) {
            *a += b;
        }
    }

    pub fn scaled(&self, c: f64) -> LinearModel {
        LinearModel {
            w: self.w.iter().map(|v| c * v).collect(),
        }
    }

    /// Radial projection onto the ball of radius `r_w`.
    pub fn project_ball(&mut self, r_w: f64) {
        let n = self.norm();
        if n > r_w {
            let c = r_w / n;
            for v in &mut self.w {
                *v *= c;
            }
        }
    }

    /// Writes the plain-text model format: first line is the dimension,
    /// followed by one `index:weight` line per coordinate (0-based). Weights
    /// are printed with 17 significant digits so reloading is exact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{}", self.w.len())?;
        for (i, v) in self.w.iter().enumerate() {
            writeln!(out, "{}:{:.16e}", i, v)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let dim: usize = match lines.next() {
            Some((_, line)) => {
                let line = line?;
                line.trim().parse().map_err(|_| Error::Parse {
                    line: 1,
                    msg: format!("expected model dimension, got {line:?}"),
                })?
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty model file".into(),
                })
            }
        };
        let mut w = vec![0.0; dim];
        for (lineno, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let (idx, val) = t.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("expected index:weight, got {t:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad index {idx:?}"),
            })?;
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad weight {val:?}"),
            })?;
            if idx >= dim {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("index {idx} out of range for dimension {dim}"),
                });
            }
            w[idx] = val;
        }
        Ok(LinearModel { w })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;

    fn s(features: &[(u32, f64)], y: i8) -> Sample {
        Sample {
            features: features.to_vec(),
            label: y,
        }
    }

    #[test]
    fn score_and_axpy() {
        let mut m = LinearModel::zeros(3);
        m.axpy(2.0, &s(&[(0, 1.0), (2, -0.5)], 1));
        assert_eq!(m.w, vec![2.0, 0.0, -1.0]);
        assert_eq!(m.score(&s(&[(0, 1.0), (1, 10.0)], 1)), 2.0);
    }

    #[test]
    fn ball_projection_is_radial() {
        let mut m = LinearModel { w: vec![3.0, 4.0] };
        m.project_ball(1.0);
        assert!((m.norm() - 1.0).abs() < 1e-12);
        assert!((m.w[0] / m.w[1] - 0.75).abs() < 1e-12);
        let mut inside = LinearModel { w: vec![0.1, 0.2] };
        inside.project_ball(1.0);
        assert_eq!(inside.w, vec![0.1, 0.2]);
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("ndopt_model_rt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.txt");
        let m = LinearModel {
            w: vec![std::f64::consts::PI, -1.0 / 3.0, 1e-300, 0.0],
        };
        m.save(&path).unwrap();
        let back = LinearModel::load(&path).unwrap();
        assert_eq!(m, back);
    }
}
