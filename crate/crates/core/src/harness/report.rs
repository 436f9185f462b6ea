use std::io::Write;

use super::TableRow;
use crate::num::Real;

pub const CSV_HEADER: &str = "M,n,em_mean,em_stderr,pcm_mean,pcm_stderr,em_err_pct,pcm_err_pct";

/// Six significant digits in the style of C's `%g`: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros
/// dropped.
pub fn format_sig6(v: f64) -> String {
    const P: i32 = 6;
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_table_csv<T: Real, W: Write>(rows: &[TableRow<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let cols = [
            r.em.mean,
            r.em.stderr,
            r.pcm.mean,
            r.pcm.stderr,
            r.em_err_pct,
            r.pcm_err_pct,
        ]
        .map(|x| format_sig6(x.as_f64()));
        writeln!(out, "{},{},{}", r.trials, r.steps, cols.join(","))?;
    }
    out.flush()
}

pub fn table_csv<T: Real>(rows: &[TableRow<T>]) -> String {
    let mut buf = Vec::new();
    write_table_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::PriceEstimate;

    #[test]
    fn sig6_matches_printf_g() {
        let cases = [
            (8.17140, "8.1714"),
            (8.171358131, "8.17136"),
            (1_000_000.0, "1e+06"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234567, "1.23457e-05"),
            (22.1016, "22.1016"),
            (-0.4452, "-0.4452"),
            (9.999995, "10"),
            (0.0, "0"),
            (100.0, "100"),
            (1.40319930, "1.4032"),
        ];
        for (v, s) in cases {
            assert_eq!(format_sig6(v), s, "{v}");
        }
    }

    #[test]
    fn header_only_for_no_rows() {
        assert_eq!(table_csv::<f64>(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn row_layout() {
        let est = |m| PriceEstimate {
            mean: m,
            stderr: 0.0125,
            trials: 1000,
            steps: 10,
            elapsed: 0.5,
        };
        let row = TableRow {
            trials: 1000,
            steps: 10,
            em: est(8.5),
            pcm: est(8.2),
            em_err_pct: 4.02,
            pcm_err_pct: 0.35,
        };
        let csv = table_csv(&[row]);
        assert_eq!(csv.lines().nth(1), Some("1000,10,8.5,0.0125,8.2,0.0125,4.02,0.35"));
    }
}
