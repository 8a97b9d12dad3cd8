//! Sparse datasets: SVMlight parsing, stratified splits, multi-pass streams,
//! and a synthetic Gaussian generator for desk-scale experiments.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One labeled sample. `features` is sorted by index (0-based) with no
/// duplicates; `label` is -1 or +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<(u32, f64)>,
    pub label: i8,
}

impl Sample {
    pub fn norm(&self) -> f64 {
        self.features.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// Summary statistics of a sample collection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetMeta {
    pub n: usize,
    pub dim: usize,
    pub n_pos: usize,
    /// Empirical positive-class prior, `n_pos / n`.
    pub p_hat: f64,
    /// Max feature norm over the collection.
    pub r_x: f64,
}

impl DatasetMeta {
    pub fn compute(samples: &[Sample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyData("cannot compute metadata".into()));
        }
        let mut dim = 0usize;
        let mut n_pos = 0usize;
        let mut r_x = 0.0f64;
        for s in samples {
            if let Some(&(i, _)) = s.features.last() {
                dim = dim.max(i as usize + 1);
            }
            if s.label > 0 {
                n_pos += 1;
            }
            r_x = r_x.max(s.norm());
        }
        let n = samples.len();
        let p_hat = n_pos as f64 / n as f64;
        if !(p_hat > 0.0 && p_hat < 1.0) {
            return Err(Error::SingleClass(format!("{n_pos} of {n} positive")));
        }
        Ok(DatasetMeta { n, dim, n_pos, p_hat, r_x })
    }

    /// Skew parameter `theta = (1 - p) / p` used by the fractional measures.
    pub fn theta(&self) -> f64 {
        (1.0 - self.p_hat) / self.p_hat
    }
}

/// Parses SVMlight/LIBSVM text: `label idx:val idx:val ...` per line, indices
/// 1-based in the file and shifted to 0-based here. Labels may be `+1/-1` or
/// `1/0`; `0` is mapped to `-1`. Lines that are empty or start with `#` are
/// skipped. Errors carry 1-based line numbers.
pub fn parse_libsvm(reader: impl std::io::Read) -> Result<Vec<Sample>> {
    let reader = BufReader::new(reader);
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let parse_err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let label_tok = parts.next().expect("non-empty line has a first token");
        let label = match label_tok {
            "+1" | "1" | "1.0" => 1,
            "-1" | "0" | "-1.0" | "0.0" => -1,
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| parse_err(format!("bad label {other:?}")))?;
                if v > 0.0 {
                    1
                } else {
                    -1
                }
            }
        };
        let mut features: Vec<(u32, f64)> = Vec::new();
        for tok in parts {
            let (idx, val) = tok
                .rsplit_once(':')
                .ok_or_else(|| parse_err(format!("expected index:value, got {tok:?}")))?;
            let idx: u32 = idx
                .parse()
                .map_err(|_| parse_err(format!("bad feature index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err("feature indices are 1-based".into()));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(format!("bad feature value {val:?}")))?;
            let zero_based = idx - 1;
            if let Some(&(prev, _)) = features.last() {
                if zero_based <= prev {
                    return Err(parse_err(format!(
                        "feature index {idx} out of order or duplicated"
                    )));
                }
            }
            features.push((zero_based, val));
        }
        samples.push(Sample { features, label });
    }
    if samples.is_empty() {
        return Err(Error::EmptyData("no samples in input".into()));
    }
    Ok(samples)
}

pub fn load_libsvm(path: &Path) -> Result<Vec<Sample>> {
    parse_libsvm(std::fs::File::open(path)?)
}

/// Writes samples in the same SVMlight format (1-based indices, 17
/// significant digits). `parse_libsvm(write_libsvm(s)) == s`.
pub fn write_libsvm(samples: &[Sample], mut out: impl Write) -> Result<()> {
    for s in samples {
        write!(out, "{}", if s.label > 0 { "+1" } else { "-1" })?;
        for &(i, v) in &s.features {
            write!(out, " {}:{:.16e}", i + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Three-way stratified split. `fractions` must be non-negative and sum to 1
/// (tolerance 1e-9). Within each class, samples are shuffled with the seed and
/// then cut by cumulative rounded counts, so every split's class skew matches
/// the input within one sample per class. Errors if a split with positive
/// fraction receives no sample of some class.
pub fn split_stratified(
    samples: &[Sample],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>, Vec<Sample>)> {
    let (f1, f2, f3) = fractions;
    if f1 < 0.0 || f2 < 0.0 || f3 < 0.0 || (f1 + f2 + f3 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "split fractions ({f1}, {f2}, {f3}) must be non-negative and sum to 1"
        )));
    }
    DatasetMeta::compute(samples)?; // rejects empty and single-class inputs

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits: [Vec<Sample>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for class in [1i8, -1i8] {
        let mut idx: Vec<usize> = (0..samples.len())
            .filter(|&i| samples[i].label == class)
            .collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let cut1 = (f1 * n as f64).round() as usize;
        let cut2 = ((f1 + f2) * n as f64).round() as usize;
        let cut1 = cut1.min(n);
        let cut2 = cut2.clamp(cut1, n);
        for (k, range) in [(0, 0..cut1), (1, cut1..cut2), (2, cut2..n)] {
            let frac = [f1, f2, f3][k];
            if frac > 0.0 && range.is_empty() {
                return Err(Error::SingleClass(format!(
                    "split {k} would lose class {class}"
                )));
            }
            splits[k].extend(range.map(|j| samples[idx[j]].clone()));
        }
    }
    let [a, b, c] = splits;
    Ok((a, b, c))
}

/// Multi-pass sample stream: pass `p` visits every index once in an order
/// shuffled with `seed + p`. Yields `passes * samples.len()` indices total.
pub struct Stream {
    n: usize,
    passes: usize,
    seed: u64,
    pass: usize,
    pos: usize,
    order: Vec<usize>,
}

pub fn stream(n: usize, passes: usize, seed: u64) -> Stream {
    Stream { n, passes, seed, pass: 0, pos: 0, order: Vec::new() }
}

impl Iterator for Stream {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        if self.pos == self.order.len() {
            if self.pass == self.passes {
                return None;
            }
            let mut order: Vec<usize> = (0..self.n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(self.pass as u64));
            order.shuffle(&mut rng);
            self.order = order;
            self.pass += 1;
            self.pos = 0;
        }
        let i = self.order[self.pos];
        self.pos += 1;
        Some(i)
    }
}

/// Options for [`synth_gaussian`].
#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub n: usize,
    pub dim: usize,
    /// Positive-class prior; the generated positive count is exactly
    /// `round(n * p)`.
    pub p: f64,
    /// Distance between the two class means (along the first axis).
    pub separation: f64,
    pub seed: u64,
    /// Append a constant feature 1.0 so linear models carry an intercept.
    pub bias: bool,
    /// Divide all features by the max sample norm so `R_X = 1`.
    pub scale_to_unit: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 10_000,
            dim: 2,
            p: 0.05,
            separation: 2.0,
            seed: 0,
            bias: true,
            scale_to_unit: true,
        }
    }
}

/// Two spherical unit-variance Gaussians with means `(+-separation/2, 0, ...)`.
/// Positives are generated first; training streams reshuffle anyway.
pub fn synth_gaussian(cfg: &SynthConfig) -> Result<Vec<Sample>> {
    if cfg.n < 2 || cfg.dim == 0 {
        return Err(Error::InvalidParameter("synth needs n >= 2 and dim >= 1".into()));
    }
    if !(cfg.p > 0.0 && cfg.p < 1.0) {
        return Err(Error::InvalidPrior(cfg.p));
    }
    let n_pos = ((cfg.n as f64 * cfg.p).round() as usize).clamp(1, cfg.n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let label: i8 = if i < n_pos { 1 } else { -1 };
        let mean0 = f64::from(label) * cfg.separation / 2.0;
        let mut features = Vec::with_capacity(cfg.dim + usize::from(cfg.bias));
        for d in 0..cfg.dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = if d == 0 { mean0 + z } else { z };
            features.push((d as u32, v));
        }
        if cfg.bias {
            features.push((cfg.dim as u32, 1.0));
        }
        samples.push(Sample { features, label });
    }
    if cfg.scale_to_unit {
        scale_to_unit_norm(&mut samples);
    }
    Ok(samples)
}

/// In-place max-norm normalization: divides every feature by the collection's
/// max sample norm, making `R_X = 1`. No-op when all samples are zero.
pub fn scale_to_unit_norm(samples: &mut [Sample]) {
    let r_x = samples.iter().map(Sample::norm).fold(0.0, f64::max);
    if r_x > 0.0 {
        for s in samples.iter_mut() {
            for f in &mut s.features {
                f.1 /= r_x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_based_indices_and_label_forms() {
        let text = "+1 1:0.5 3:-2\n0 2:1.0\n\n# comment\n-1 1:3 2:4 # trailing\n";
        let s = parse_libsvm(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].features, vec![(0, 0.5), (2, -2.0)]);
        assert_eq!(s[0].label, 1);
        assert_eq!(s[1].label, -1);
        assert_eq!(s[1].features, vec![(1, 1.0)]);
        assert_eq!(s[2].features, vec![(0, 3.0), (1, 4.0)]);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "+1 1:0.5\n+1 nonsense\n";
        match parse_libsvm(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_libsvm(b"" as &[u8]), Err(Error::EmptyData(_))));
        // Malformed feature tokens on the first data line.
        assert!(matches!(
            parse_libsvm(b"+1 0:1.0\n" as &[u8]),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "+1 1:0.1 7:-3.25\n-1 2:1e-12\n";
        let orig = parse_libsvm(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&orig, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice()).unwrap();
        assert_eq!(orig, back);
    }

    #[test]
    fn meta_counts_exactly() {
        let s = parse_libsvm("+1 1:1\n-1 1:2\n-1 2:2\n".as_bytes()).unwrap();
        let meta = DatasetMeta::compute(&s).unwrap();
        assert_eq!(meta.n, 3);
        assert_eq!(meta.n_pos, 1);
        assert_eq!(meta.dim, 2);
        assert_eq!(meta.p_hat * meta.n as f64, meta.n_pos as f64);
        assert!((meta.theta() - 2.0).abs() < 1e-15);
        // Norms are 1, 2, 2: the max is the lone `2:2` sample.
        assert_eq!(meta.r_x, 2.0);
    }

    #[test]
    fn single_class_is_rejected() {
        let s = parse_libsvm("+1 1:1\n+1 1:2\n".as_bytes()).unwrap();
        assert!(matches!(DatasetMeta::compute(&s), Err(Error::SingleClass(_))));
    }

    #[test]
    fn stratified_split_preserves_skew() {
        // 10 samples, 3 positive, split (0.7, 0.0, 0.3): train gets 2 or 3
        // positives.
        let mut samples = Vec::new();
        for i in 0..10 {
            samples.push(Sample {
                features: vec![(0, i as f64)],
                label: if i < 3 { 1 } else { -1 },
            });
        }
        let (train, val, test) = split_stratified(&samples, (0.7, 0.0, 0.3), 5).unwrap();
        assert!(val.is_empty());
        assert_eq!(train.len() + test.len(), 10);
        let pos = train.iter().filter(|s| s.label > 0).count();
        assert!(pos == 2 || pos == 3, "train positives {pos}");
        // Deterministic under the same seed.
        let again = split_stratified(&samples, (0.7, 0.0, 0.3), 5).unwrap();
        assert_eq!(again.0, train);
    }

    #[test]
    fn split_rejects_bad_fractions_and_class_loss() {
        let s = parse_libsvm("+1 1:1\n-1 1:2\n-1 1:3\n-1 1:4\n".as_bytes()).unwrap();
        assert!(split_stratified(&s, (0.5, 0.2, 0.2), 0).is_err());
        // One positive cannot be present in two positive-fraction splits.
        assert!(matches!(
            split_stratified(&s, (0.5, 0.0, 0.5), 0),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn stream_visits_each_sample_once_per_pass() {
        let mut counts = vec![0usize; 7];
        let mut first_pass = Vec::new();
        let mut second_pass = Vec::new();
        for (k, i) in stream(7, 3, 9).enumerate() {
            counts[i] += 1;
            if k < 7 {
                first_pass.push(i);
            } else if k < 14 {
                second_pass.push(i);
            }
        }
        assert!(counts.iter().all(|&c| c == 3));
        assert_ne!(first_pass, second_pass, "passes should reshuffle");
        let replay: Vec<usize> = stream(7, 3, 9).collect();
        assert_eq!(replay.len(), 21);
        assert_eq!(&replay[..7], &first_pass[..]);
    }

    #[test]
    fn synth_has_exact_positive_count() {
        let cfg = SynthConfig { n: 10_000, p: 0.05, ..Default::default() };
        let samples = synth_gaussian(&cfg).unwrap();
        let meta = DatasetMeta::compute(&samples).unwrap();
        assert_eq!(meta.n_pos, 500);
        assert_eq!(meta.dim, 3); // 2 coordinates + bias
        assert!((meta.r_x - 1.0).abs() < 1e-12);
        // Separation 0 still yields valid two-class data.
        let flat = synth_gaussian(&SynthConfig { separation: 0.0, n: 100, ..cfg }).unwrap();
        assert_eq!(DatasetMeta::compute(&flat).unwrap().n_pos, 5);
    }
}
