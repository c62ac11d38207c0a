//! Binary field (`RDSF`), model (`RDSM`) and sample (`RDSS`) files, plus
//! CSV samples. All binary numbers are little-endian. Decoding errors name
//! the byte offset (binary) or line (CSV) where parsing stopped.

use crate::bspline::SplineDegree;
use crate::density::{DensityModel, SensitivityMap};
use crate::error::{RdsError, Result};
use crate::grid::{BoundaryCondition, GridSpec, ScalarField};
use crate::samples::SampleSet;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const FIELD_MAGIC: &[u8; 4] = b"RDSF";
pub const MODEL_MAGIC: &[u8; 4] = b"RDSM";
pub const SAMPLES_MAGIC: &[u8; 4] = b"RDSS";
pub const FORMAT_VERSION: u16 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> RdsError {
        RdsError::format(format!("byte {}", self.pos), msg)
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.err(format!("truncated {what}: need {n} bytes, {} left", self.buf.len() - self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != want {
            self.pos -= 4;
            return Err(self.err(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(want)
            )));
        }
        Ok(())
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = count.checked_mul(8).ok_or_else(|| self.err(format!("{what} length overflows")))?;
        let raw = self.take(bytes, what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn version(&mut self) -> Result<()> {
        let start = self.pos;
        let v = self.u16("version")?;
        if v != FORMAT_VERSION {
            self.pos = start;
            return Err(self.err(format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.err(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }

    fn grid(&mut self) -> Result<GridSpec> {
        let d = self.u16("dimension")? as usize;
        if d == 0 {
            self.pos -= 2;
            return Err(self.err("dimension is zero"));
        }
        let mut sizes = Vec::with_capacity(d);
        for _ in 0..d {
            let start = self.pos;
            let n = self.u64("size")?;
            let n = usize::try_from(n).map_err(|_| {
                RdsError::format(format!("byte {start}"), format!("size {n} does not fit in memory"))
            })?;
            sizes.push(n);
        }
        let step = (0..d).map(|_| self.f64("step")).collect::<Result<Vec<_>>>()?;
        let origin = (0..d).map(|_| self.f64("origin")).collect::<Result<Vec<_>>>()?;
        let mut bcs = Vec::with_capacity(d);
        for _ in 0..d {
            let code = self.u8("boundary code")?;
            let bc = BoundaryCondition::from_code(code).ok_or_else(|| {
                RdsError::format(format!("byte {}", self.pos - 1), format!("unknown boundary code {code}"))
            })?;
            bcs.push(bc);
        }
        let at = self.pos;
        GridSpec::new(sizes, step, origin, bcs).map_err(|e| RdsError::format(format!("byte {at}"), e.to_string()))
    }

    fn field(&mut self, grid: GridSpec) -> Result<ScalarField> {
        let values = self.f64s(grid.len(), "values")?;
        Ok(ScalarField::new(grid, values)?)
    }
}

fn put_grid(out: &mut Vec<u8>, grid: &GridSpec) {
    out.extend_from_slice(&(grid.dim() as u16).to_le_bytes());
    grid.sizes().iter().for_each(|&n| out.extend_from_slice(&(n as u64).to_le_bytes()));
    grid.step().iter().for_each(|h| out.extend_from_slice(&h.to_le_bytes()));
    grid.origin().iter().for_each(|o| out.extend_from_slice(&o.to_le_bytes()));
    grid.bcs().iter().for_each(|bc| out.push(bc.code()));
}

fn put_values(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    values.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
}

pub fn encode_field(field: &ScalarField) -> Vec<u8> {
    let mut out = FIELD_MAGIC.to_vec();
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_grid(&mut out, field.grid());
    put_values(&mut out, field.values());
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<ScalarField> {
    let mut r = Reader::new(bytes);
    r.magic(FIELD_MAGIC)?;
    r.version()?;
    let grid = r.grid()?;
    let f = r.field(grid)?;
    r.finish()?;
    Ok(f)
}

pub fn encode_model(model: &DensityModel) -> Vec<u8> {
    let mut out = MODEL_MAGIC.to_vec();
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_grid(&mut out, &model.grid);
    out.push(model.degree.get());
    out.push(model.quad_scale as u8);
    put_values(&mut out, model.coeffs.values());
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<DensityModel> {
    let mut r = Reader::new(bytes);
    r.magic(MODEL_MAGIC)?;
    r.version()?;
    let grid = r.grid()?;
    let degree = r.u8("degree")?;
    let degree = SplineDegree::new(degree).map_err(|e| RdsError::format(format!("byte {}", r.pos - 1), e.to_string()))?;
    let scale_at = r.pos;
    let scale = r.u8("quadrature scale")?;
    let coeffs = r.field(grid)?;
    r.finish()?;
    DensityModel::new(coeffs, degree, scale as usize).map_err(|e| RdsError::format(format!("byte {scale_at}"), e.to_string()))
}

pub fn encode_samples(samples: &SampleSet) -> Vec<u8> {
    let mut out = SAMPLES_MAGIC.to_vec();
    out.extend_from_slice(&(samples.dim() as u16).to_le_bytes());
    out.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    put_values(&mut out, samples.coords());
    out
}

pub fn decode_samples(bytes: &[u8]) -> Result<SampleSet> {
    let mut r = Reader::new(bytes);
    r.magic(SAMPLES_MAGIC)?;
    let d = r.u16("dimension")? as usize;
    if d == 0 {
        r.pos -= 2;
        return Err(r.err("dimension is zero"));
    }
    let n = r.u64("sample count")?;
    let count = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(d))
        .ok_or_else(|| r.err(format!("sample count {n} too large")))?;
    let coords = r.f64s(count, "points")?;
    r.finish()?;
    let at = r.pos;
    SampleSet::new(d, coords).map_err(|e| RdsError::format(format!("byte {at}"), e.to_string()))
}

/// Samples as CSV: one point per line, `d` comma-separated numbers. A
/// leading non-numeric line is taken as a header; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_samples_csv(text: &str) -> Result<SampleSet> {
    let mut dim = None;
    let mut coords = Vec::new();
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if !seen_data && dim.is_none() => {
                dim = Some(fields.len());
                continue;
            }
            Err(e) => return Err(RdsError::format(format!("line {}", i + 1), format!("not a number: {e}"))),
        };
        seen_data = true;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(RdsError::format(format!("line {}", i + 1), format!("expected {d} columns, found {}", row.len())))
            }
            _ => {}
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(RdsError::format(format!("line {}", i + 1), format!("non-finite coordinate {v}")));
        }
        coords.extend(row);
    }
    let d = dim.ok_or_else(|| RdsError::format("line 1", "no samples"))?;
    SampleSet::new(d, coords)
}

pub fn samples_to_csv(samples: &SampleSet) -> String {
    let mut s = samples.seed.map(|seed| format!("# seed {seed}\n")).unwrap_or_default();
    for p in samples.iter() {
        let cols: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)
        .map_err(|e| RdsError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    f.write_all(bytes)?;
    Ok(())
}

fn located(path: &Path, e: RdsError) -> RdsError {
    match e {
        RdsError::Format { location, message } => RdsError::Format { location: format!("{}, {location}", path.display()), message },
        other => other,
    }
}

pub fn save_field(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    write(path.as_ref(), &encode_field(field))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let p = path.as_ref();
    decode_field(&read(p)?).map_err(|e| located(p, e))
}

pub fn save_model(path: impl AsRef<Path>, model: &DensityModel) -> Result<()> {
    write(path.as_ref(), &encode_model(model))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DensityModel> {
    let p = path.as_ref();
    decode_model(&read(p)?).map_err(|e| located(p, e))
}

/// Writes `RDSS`, or CSV when the extension is `.csv`.
pub fn save_samples(path: impl AsRef<Path>, samples: &SampleSet) -> Result<()> {
    let p = path.as_ref();
    if is_csv(p) {
        write(p, samples_to_csv(samples).as_bytes())
    } else {
        write(p, &encode_samples(samples))
    }
}

/// Reads `RDSS` when the file starts with its magic, CSV otherwise.
pub fn load_samples(path: impl AsRef<Path>) -> Result<SampleSet> {
    let p = path.as_ref();
    let bytes = read(p)?;
    let parsed = if bytes.starts_with(SAMPLES_MAGIC) {
        decode_samples(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| RdsError::format(format!("byte {}", e.utf8_error().valid_up_to()), "not UTF-8 text"))?;
        parse_samples_csv(&text)
    };
    parsed.map_err(|e| located(p, e))
}

fn is_csv(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Sensitivity from a file: an `RDSF` field of node values (interpolated
/// linearly) or a JSON analytic spec such as `{"kind":"uniform"}`.
pub fn load_sensitivity(path: impl AsRef<Path>) -> Result<SensitivityMap> {
    let p = path.as_ref();
    let bytes = read(p)?;
    if bytes.starts_with(FIELD_MAGIC) {
        let field = decode_field(&bytes).map_err(|e| located(p, e))?;
        return SensitivityMap::gridded(field, SplineDegree::LINEAR);
    }
    let map: SensitivityMap = serde_json::from_slice(&bytes)
        .map_err(|e| RdsError::format(format!("{}, line {}", p.display(), e.line()), e.to_string()))?;
    validate_sensitivity(map)
}

/// Re-runs the constructor checks on a deserialized analytic map.
pub fn validate_sensitivity(map: SensitivityMap) -> Result<SensitivityMap> {
    match map {
        SensitivityMap::SinSq { period, phase, eps } => SensitivityMap::sinsq(period, phase, eps),
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(
            vec![3, 4],
            vec![0.25, 0.5],
            vec![-1.0, 2.0],
            vec![BoundaryCondition::Periodic, BoundaryCondition::Mirror],
        )
        .unwrap()
    }

    #[test]
    fn field_layout_is_fixed() {
        let f = ScalarField::from_fn(grid(), |x| x[0] + 10.0 * x[1]);
        let b = encode_field(&f);
        assert_eq!(&b[0..4], b"RDSF");
        assert_eq!(u16::from_le_bytes([b[4], b[5]]), 1);
        assert_eq!(u16::from_le_bytes([b[6], b[7]]), 2);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 3);
        let header = 8 + 2 * 8 + 2 * 8 + 2 * 8 + 2;
        assert_eq!(&b[header - 2..header], &[0, 2]);
        assert_eq!(b.len(), header + 12 * 8);
        assert_eq!(f64::from_le_bytes(b[header..header + 8].try_into().unwrap()), f.values()[0]);
        assert_eq!(decode_field(&b).unwrap(), f);
    }

    #[test]
    fn truncated_field_names_offset() {
        let f = ScalarField::zeros(grid());
        let b = encode_field(&f);
        let err = decode_field(&b[..b.len() - 3]).unwrap_err().to_string();
        assert!(err.contains("byte 58"), "{err}");
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_field(&bad).unwrap_err().to_string().contains("byte 0"));
        let mut bad_bc = b.clone();
        bad_bc[56] = 9;
        assert!(decode_field(&bad_bc).unwrap_err().to_string().contains("byte 56"));
        let mut long = b;
        long.push(0);
        assert!(decode_field(&long).unwrap_err().to_string().contains("trailing"));
    }

    #[test]
    fn model_round_trip() {
        let c = ScalarField::from_fn(grid(), |x| x[0] * x[1]);
        let m = DensityModel::new(c, SplineDegree::CUBIC, 4).unwrap();
        let b = encode_model(&m);
        assert_eq!(&b[0..4], b"RDSM");
        assert_eq!(decode_model(&b).unwrap(), m);
        let mut bad = b.clone();
        bad[58] = 2;
        assert!(decode_model(&bad).unwrap_err().to_string().contains("byte 58"));
    }

    #[test]
    fn csv_header_comments_and_errors() {
        let s = parse_samples_csv("x,y\n# note\n0.1,0.2\n\n0.3, 0.4\n").unwrap();
        assert_eq!(s.coords(), &[0.1, 0.2, 0.3, 0.4]);
        let e = parse_samples_csv("0.1,0.2\n0.3\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_samples_csv("0.1,0.2\n0.3,abc\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(parse_samples_csv("# nothing\n").is_err());
    }

    #[test]
    fn sensitivity_files() {
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("xi.json");
        fs::write(&json, r#"{"kind":"sinsq","T":0.1,"phase":0.4,"eps":0.001}"#).unwrap();
        assert_eq!(load_sensitivity(&json).unwrap(), SensitivityMap::sinsq(0.1, 0.4, 1e-3).unwrap());
        fs::write(&json, r#"{"kind":"sinsq","T":-1,"phase":0.4,"eps":0.001}"#).unwrap();
        assert!(load_sensitivity(&json).is_err());
        let field = dir.path().join("xi.rdsf");
        save_field(&field, &ScalarField::constant(grid(), 0.5)).unwrap();
        assert!(matches!(load_sensitivity(&field).unwrap(), SensitivityMap::Gridded { .. }));
    }

    proptest! {
        #[test]
        fn samples_round_trip(pts in prop::collection::vec(-1e6f64..1e6, 0..40), csv in any::<bool>()) {
            let n = pts.len() / 2 * 2;
            let s = SampleSet::new(2, pts[..n].to_vec()).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join(if csv { "s.csv" } else { "s.rdss" });
            save_samples(&path, &s).unwrap();
            if n == 0 && csv {
                prop_assert!(load_samples(&path).is_err());
            } else {
                let back = load_samples(&path).unwrap();
                prop_assert_eq!(back.coords(), s.coords());
            }
        }

        #[test]
        fn field_round_trip(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 12)) {
            let f = ScalarField::new(grid(), vals).unwrap();
            prop_assert_eq!(decode_field(&encode_field(&f)).unwrap(), f);
        }
    }
}
