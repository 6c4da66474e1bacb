//! Plain-text formats. CSV files use a header row, `.` decimals, LF line
//! endings and 12 significant digits; leading `#` lines carry metadata and are
//! skipped by the readers.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use qvault_core::numerics::ComplexMatrix;
use qvault_core::tomography::{CountRecord, MubSet, NoiseMode};
use qvault_core::vault::{Color, Pixel, VaultImage};
use qvault_core::Complex64;

use crate::RunMeta;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("unsupported magic {0:?}, expected P3")]
    UnsupportedMagic(String),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

type Result<T> = std::result::Result<T, FormatError>;

fn malformed(msg: impl Into<String>) -> FormatError {
    FormatError::Malformed(msg.into())
}

/// `x` with 12 significant digits in the shortest of fixed or scientific
/// notation, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_meta(out: &mut String, meta: &RunMeta) {
    for (k, v) in meta.pairs() {
        let _ = writeln!(out, "# {k}={v}");
    }
}

/// Non-comment, non-empty lines.
fn data_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            out.push(trimmed.to_string());
        }
    }
    Ok(out)
}

fn expect_header(lines: &[String], header: &str) -> Result<()> {
    match lines.first() {
        Some(h) if h.replace(' ', "") == header => Ok(()),
        Some(h) => Err(malformed(format!("expected header {header:?}, found {h:?}"))),
        None => Err(malformed("empty file")),
    }
}

fn fields(line: &str, n: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != n {
        return Err(malformed(format!("expected {n} fields in {line:?}")));
    }
    Ok(f)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| malformed(format!("cannot parse {s:?}")))
}

/// A `t,value` style table with an arbitrary header.
pub fn write_table<W: Write>(mut w: W, meta: &RunMeta, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Dense matrix as `row,col,re,im`.
pub fn write_matrix<W: Write>(mut w: W, meta: &RunMeta, m: &ComplexMatrix) -> Result<()> {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("row,col,re,im\n");
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            let _ = writeln!(out, "{r},{c},{},{}", fmt_num(z.re), fmt_num(z.im));
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_matrix<R: BufRead>(reader: R) -> Result<ComplexMatrix> {
    let lines = data_lines(reader)?;
    expect_header(&lines, "row,col,re,im")?;
    let mut entries = Vec::new();
    for line in &lines[1..] {
        let f = fields(line, 4)?;
        entries.push((parse::<usize>(f[0])?, parse::<usize>(f[1])?, Complex64::new(parse(f[2])?, parse(f[3])?)));
    }
    let dim = (entries.len() as f64).sqrt() as usize;
    if dim == 0 || dim * dim != entries.len() {
        return Err(malformed("matrix CSV must list all d x d entries"));
    }
    let mut data = vec![None; dim * dim];
    for (r, c, z) in entries {
        if r >= dim || c >= dim || data[r * dim + c].replace(z).is_some() {
            return Err(malformed(format!("bad or repeated entry ({r}, {c})")));
        }
    }
    let data = data.into_iter().map(|z| z.expect("all entries filled")).collect();
    ComplexMatrix::new(dim, dim, data).map_err(|e| malformed(e.to_string()))
}

pub fn write_counts<W: Write>(mut w: W, meta: &RunMeta, counts: &CountRecord) -> Result<()> {
    let mut out = String::new();
    write_meta(&mut out, meta);
    let _ = writeln!(out, "# shots_per_basis={}", counts.shots_per_basis);
    out.push_str("basis,outcome,count\n");
    for (b, row) in counts.counts.iter().enumerate() {
        for (k, n) in row.iter().enumerate() {
            let _ = writeln!(out, "{b},{k},{n}");
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads `basis,outcome,count` rows into a Poisson-mode record (row sums are
/// not constrained).
pub fn read_counts<R: BufRead>(reader: R) -> Result<CountRecord> {
    let lines = data_lines(reader)?;
    expect_header(&lines, "basis,outcome,count")?;
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for line in &lines[1..] {
        let f = fields(line, 3)?;
        let (b, k, n) = (parse::<usize>(f[0])?, parse::<usize>(f[1])?, parse::<u64>(f[2])?);
        if counts.len() <= b {
            counts.resize(b + 1, Vec::new());
        }
        if counts[b].len() <= k {
            counts[b].resize(k + 1, 0);
        }
        counts[b][k] = n;
    }
    let shots = counts.first().map_or(0, |r| r.iter().sum());
    CountRecord::new(shots, counts, NoiseMode::Poisson).map_err(|e| malformed(e.to_string()))
}

pub fn write_mubs<W: Write>(mut w: W, meta: &RunMeta, mubs: &MubSet) -> Result<()> {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("basis,state,component,re,im\n");
    for (b, basis) in mubs.bases().iter().enumerate() {
        for (s, state) in basis.iter().enumerate() {
            for (c, z) in state.amplitudes().iter().enumerate() {
                let _ = writeln!(out, "{b},{s},{c},{},{}", fmt_num(z.re), fmt_num(z.im));
            }
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// `x,y,c,m,y,k` rows, one per pixel in row-major order.
pub fn write_cmyk_csv<W: Write>(mut w: W, meta: &RunMeta, img: &VaultImage) -> Result<()> {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("x,y,c,m,y,k\n");
    for y in 0..img.height() {
        for x in 0..img.width() {
            let wts = img.pixel(x, y).weights().map(fmt_num);
            let _ = writeln!(out, "{x},{y},{}", wts.join(","));
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// One-hot rows become color pixels, anything else a mixture.
pub fn read_cmyk_csv<R: BufRead>(reader: R) -> Result<VaultImage> {
    let lines = data_lines(reader)?;
    expect_header(&lines, "x,y,c,m,y,k")?;
    let mut rows = Vec::new();
    for line in &lines[1..] {
        let f = fields(line, 6)?;
        let w = [parse(f[2])?, parse(f[3])?, parse(f[4])?, parse(f[5])?];
        rows.push((parse::<usize>(f[0])?, parse::<usize>(f[1])?, w));
    }
    let width = rows.iter().map(|r| r.0 + 1).max().ok_or_else(|| malformed("no pixels"))?;
    let height = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    let mut pixels = vec![None; width * height];
    for (x, y, w) in rows {
        let pixel = match w.iter().position(|&v: &f64| v == 1.0) {
            Some(k) if w.iter().filter(|&&v| v == 0.0).count() == 3 => Pixel::Color(Color::ALL[k]),
            _ => Pixel::Mixture(w),
        };
        if pixels[y * width + x].replace(pixel).is_some() {
            return Err(malformed(format!("pixel ({x}, {y}) listed twice")));
        }
    }
    let pixels = pixels.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| malformed("missing pixels"))?;
    VaultImage::new(width, height, pixels).map_err(|e| malformed(e.to_string()))
}

/// ASCII pixmap; mixtures render as blended RGB.
pub fn write_ppm<W: Write>(mut w: W, meta: &RunMeta, img: &VaultImage) -> Result<()> {
    let mut out = String::from("P3\n");
    write_meta(&mut out, meta);
    let _ = writeln!(out, "{} {}\n255", img.width(), img.height());
    for row in img.rgb().chunks(img.width()) {
        let cells: Vec<String> = row.iter().map(|[r, g, b]| format!("{r} {g} {b}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads a P3 pixmap with maximum value 255, mapping every pixel to the
/// nearest of the four CMYK colors.
pub fn read_ppm<R: BufRead>(reader: R) -> Result<VaultImage> {
    let mut tokens = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("");
        tokens.extend(content.split_whitespace().map(str::to_string));
    }
    let mut it = tokens.into_iter();
    let magic = it.next().ok_or_else(|| malformed("empty file"))?;
    if magic != "P3" {
        return Err(FormatError::UnsupportedMagic(magic));
    }
    let mut next_num = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| malformed(format!("missing {what}")))?;
        parse(&tok)
    };
    let (width, height, maxval) = (next_num("width")?, next_num("height")?, next_num("maximum value")?);
    if maxval != 255 {
        return Err(malformed(format!("maximum value must be 255, found {maxval}")));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let mut rgb = [0u8; 3];
        for c in &mut rgb {
            let v = next_num("sample")?;
            *c = u8::try_from(v).ok().filter(|_| v <= maxval).ok_or_else(|| malformed("sample above 255"))?;
        }
        pixels.push(Pixel::Color(Color::nearest(rgb)));
    }
    if it.next().is_some() {
        return Err(malformed("trailing data after the last pixel"));
    }
    VaultImage::new(width, height, pixels).map_err(|e| malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qvault_core::tomography::build_mubs_d4;

    fn meta() -> RunMeta {
        RunMeta::new(7, "simplified", "0:1:11")
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(123456.789), "123456.789");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(-2.5e13), "-2.5e13");
        assert_eq!(fmt_num(0.99999999999999), "1");
        assert_eq!(fmt_num(1.5e-5), "0.000015");
    }

    #[test]
    fn ppm_round_trip_and_blend() {
        let img = VaultImage::from_colors(2, 2, Color::ALL.to_vec()).unwrap();
        let mut buf = Vec::new();
        write_ppm(&mut buf, &meta(), &img).unwrap();
        assert_eq!(read_ppm(buf.as_slice()).unwrap(), img);

        let mixed = VaultImage::new(1, 1, vec![Pixel::Mixture([0.5, 0.0, 0.0, 0.5])]).unwrap();
        let mut buf = Vec::new();
        write_ppm(&mut buf, &meta(), &mixed).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("1 1\n255\n0 128 128\n"));
    }

    #[test]
    fn ppm_errors() {
        assert!(matches!(read_ppm("P6\n1 1\n255\n".as_bytes()), Err(FormatError::UnsupportedMagic(m)) if m == "P6"));
        assert!(matches!(read_ppm("P3\n1 1\n255\n0 0".as_bytes()), Err(FormatError::Malformed(_))));
        assert!(matches!(read_ppm("P3\n1 1\n15\n0 0 0".as_bytes()), Err(FormatError::Malformed(_))));
    }

    #[test]
    fn cmyk_csv_round_trip() {
        let img = VaultImage::new(
            2,
            1,
            vec![Pixel::Color(Color::Yellow), Pixel::Mixture([0.25, 0.25, 0.25, 0.25])],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_cmyk_csv(&mut buf, &meta(), &img).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("x,y,c,m,y,k\n0,0,0,0,1,0\n1,0,0.25,0.25,0.25,0.25\n"));
        assert_eq!(read_cmyk_csv(buf.as_slice()).unwrap(), img);
    }

    #[test]
    fn matrix_and_counts_round_trip() {
        let m = ComplexMatrix::from_fn(2, 2, |r, c| Complex64::new(r as f64 * 0.5, c as f64 - 0.25));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &meta(), &m).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);

        let rec = CountRecord::new(0, vec![vec![3, 1, 0, 9]; 5], NoiseMode::Poisson).unwrap();
        let mut buf = Vec::new();
        write_counts(&mut buf, &meta(), &rec).unwrap();
        assert_eq!(read_counts(buf.as_slice()).unwrap().counts, rec.counts);
    }

    #[test]
    fn mub_export_lists_every_amplitude() {
        let mut buf = Vec::new();
        write_mubs(&mut buf, &meta(), &build_mubs_d4().unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 5 * 4 * 4);
        assert!(text.contains("\n1,0,1,0,0.5\n"));
    }
}
