//! Convergence-history CSV: one row per (restart, target).

use std::io::Write;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::restart::{ConvergenceRecord, TargetRecord};

pub const HEADER: &str = "restart,cum_matvec,target_index,eig_estimate,res_estimate,res_true,converged";

/// 17 significant digits, enough to read back the same `f64`.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_convergence_csv<W: Write>(mut w: W, records: &[ConvergenceRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(invalid("no convergence records to write"));
    }
    w.write_all(HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for rec in records {
        for (i, t) in rec.targets.iter().enumerate() {
            let res_true = t.res_true.map(fmt_f64).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                rec.restart,
                rec.cum_matvec,
                i + 1,
                fmt_f64(t.eig_estimate),
                fmt_f64(t.res_estimate),
                res_true,
                t.converged
            )?;
        }
    }
    Ok(())
}

pub fn emit_convergence_csv(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_convergence_csv(&mut buf, records)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.split('\n');
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", lineno + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let restart: usize = f[0].parse().map_err(|_| bad("restart"))?;
        let cum_matvec: usize = f[1].parse().map_err(|_| bad("cum_matvec"))?;
        let index: usize = f[2].parse().map_err(|_| bad("target_index"))?;
        let target = TargetRecord {
            eig_estimate: f[3].parse().map_err(|_| bad("eig_estimate"))?,
            res_estimate: f[4].parse().map_err(|_| bad("res_estimate"))?,
            res_true: if f[5].is_empty() { None } else { Some(f[5].parse().map_err(|_| bad("res_true"))?) },
            converged: f[6].parse().map_err(|_| bad("converged"))?,
        };
        match records.last_mut() {
            Some(rec) if rec.restart == restart => {
                if rec.cum_matvec != cum_matvec || index != rec.targets.len() + 1 {
                    return Err(bad("inconsistent row within a restart"));
                }
                rec.targets.push(target);
            }
            _ => {
                if index != 1 {
                    return Err(bad("restart must start at target 1"));
                }
                records.push(ConvergenceRecord { restart, cum_matvec, targets: vec![target] });
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ConvergenceRecord> {
        vec![ConvergenceRecord {
            restart: 1,
            cum_matvec: 50,
            targets: vec![
                TargetRecord { eig_estimate: 0.1 + 0.2, res_estimate: 1e-3, res_true: None, converged: false },
                TargetRecord { eig_estimate: 0.99, res_estimate: 1e-15, res_true: Some(3.3e-14), converged: true },
            ],
        }]
    }

    #[test]
    fn one_restart_two_targets() {
        let mut buf = Vec::new();
        write_convergence_csv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines[1], "1,50,1,3.0000000000000004e-1,1.0000000000000000e-3,,false");
        assert!(!text.contains('\r'));
        assert_eq!(parse_convergence_csv(&text).unwrap(), sample());
    }

    #[test]
    fn empty_records_rejected() {
        assert!(write_convergence_csv(Vec::new(), &[]).is_err());
    }

    #[test]
    fn malformed_input_rejected() {
        assert!(parse_convergence_csv("a,b\n").is_err());
        assert!(parse_convergence_csv(&format!("{HEADER}\n1,2,3\n")).is_err());
        assert!(parse_convergence_csv(&format!("{HEADER}\n1,2,2,0,0,,false\n")).is_err());
    }
}
