use std::path::Path;

use num_complex::Complex;

use crate::data::IMAGE_SIDE;
use crate::error::{invalid, Error, Result};

/// One reconstruction column of a per-sample CSV.
pub struct Column<'a> {
    pub name: &'a str,
    pub values: &'a [Complex<f64>],
}

/// Writes `index,original,<name>_re,<name>_im,...` rows.
pub fn write_reconstruction_csv(path: &Path, original: &[f64], columns: &[Column<'_>]) -> Result<()> {
    if columns.iter().any(|c| c.values.len() != original.len()) {
        return Err(invalid("reconstruction lengths differ from the original"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string(), "original".to_string()];
    for c in columns {
        header.push(format!("{}_re", c.name));
        header.push(format!("{}_im", c.name));
    }
    w.write_record(&header)?;
    for (j, x) in original.iter().enumerate() {
        let mut rec = vec![j.to_string(), x.to_string()];
        for c in columns {
            rec.push(c.values[j].re.to_string());
            rec.push(c.values[j].im.to_string());
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Binary 8-bit PGM of a `IMAGE_SIDE x IMAGE_SIDE` image with values
/// clipped to `[0, 1]`.
pub fn write_pgm(path: &Path, pixels: &[f64]) -> Result<()> {
    let side = IMAGE_SIDE;
    if pixels.len() != side * side {
        return Err(invalid(format!("PGM needs {} pixels, got {}", side * side, pixels.len())));
    }
    let mut bytes = format!("P5\n{side} {side}\n255\n").into_bytes();
    bytes.extend(pixels.iter().map(|&v| to_byte(v)));
    crate::io::write_atomic(path, &bytes)
}

/// Binary 8-bit PPM from three planes, each clipped to `[0, 1]`.
pub fn write_ppm(path: &Path, planes: [&[f64]; 3]) -> Result<()> {
    let side = IMAGE_SIDE;
    if planes.iter().any(|p| p.len() != side * side) {
        return Err(invalid(format!("PPM planes need {} pixels each", side * side)));
    }
    let mut bytes = format!("P6\n{side} {side}\n255\n").into_bytes();
    for i in 0..side * side {
        bytes.extend(planes.iter().map(|p| to_byte(p[i])));
    }
    crate::io::write_atomic(path, &bytes)
}

/// Real part of a unit-norm state scaled back by the norm of the raw
/// sample.
pub fn denormalize(state: &[Complex<f64>], norm: f64) -> Vec<f64> {
    state.iter().map(|z| z.re * norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_clipping() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        let mut px = vec![0.5; 1024];
        px[0] = -1.0;
        px[1] = 2.0;
        write_pgm(&p, &px).unwrap();
        let b = std::fs::read(&p).unwrap();
        let head = b"P5\n32 32\n255\n";
        assert_eq!(&b[..head.len()], head);
        assert_eq!(b.len(), head.len() + 1024);
        assert_eq!(&b[head.len()..head.len() + 3], &[0, 255, 128]);
        assert!(write_pgm(&p, &px[..10]).is_err());
    }

    #[test]
    fn ppm_interleaves() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.ppm");
        let (r, g, b) = (vec![1.0; 1024], vec![0.0; 1024], vec![0.2; 1024]);
        write_ppm(&p, [&r, &g, &b]).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let head = b"P6\n32 32\n255\n".len();
        assert_eq!(bytes.len(), head + 3 * 1024);
        assert_eq!(&bytes[head..head + 3], &[255, 0, 51]);
    }

    #[test]
    fn csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let rec = vec![Complex::new(0.6, 0.0), Complex::new(0.8, 1e-3)];
        write_reconstruction_csv(&p, &[0.6, 0.8], &[Column { name: "fsl", values: &rec }]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,original,fsl_re,fsl_im");
        assert_eq!(lines[2], "1,0.8,0.8,0.001");
    }
}
