//! Aggregation and the `report` summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use starid_core::stats::{fit_trend, z_test_proportions, Tails, Trend, TrendModel};

use crate::bench::{pivot_stats, query_stats, PivotRecord, QueryRecord, TrialRecord, TuneRecord};
use crate::plot::{bar_chart, line_chart, Series};
use crate::records::read_records;
use crate::Error;

/// File names of the experiment outputs.
pub const QUERY_CSV: &str = "query.csv";
pub const PIVOT_CSV: &str = "pivot.csv";
pub const VERIFY_CSV: &str = "verify.csv";
pub const GAUSS_CSV: &str = "e2e_gauss.csv";
pub const SPIKE_CSV: &str = "e2e_spike.csv";
pub const TUNE_CSV: &str = "tune.csv";
pub const SUMMARY: &str = "summary.txt";

/// Statistics of all trials sharing a method and noise spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub rho: f64,
    pub omega: usize,
    pub n: usize,
    /// a(h, b, r): fraction of trials with a correct mapping.
    pub accuracy: f64,
    pub r_accuracy: f64,
    pub mean_acc_query: f64,
    pub mean_acc_total: f64,
    pub mean_ms: f64,
}

/// Groups by method (first-seen order), then by increasing rho and omega.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut order: Vec<&str> = Vec::new();
    #[derive(Default)]
    struct Acc {
        n: usize,
        h: usize,
        r: usize,
        q: u64,
        t: u64,
        ms: f64,
    }
    let mut groups: BTreeMap<(usize, u64, usize), Acc> = BTreeMap::new();
    for rec in records {
        let m = order.iter().position(|m| *m == rec.method).unwrap_or_else(|| {
            order.push(&rec.method);
            order.len() - 1
        });
        // non-negative floats order like their bit patterns
        let a = groups.entry((m, rec.rho.to_bits(), rec.omega)).or_default();
        a.n += 1;
        a.h += rec.h_correct as usize;
        a.r += rec.r_correct as usize;
        a.q += rec.acc_query as u64;
        a.t += rec.acc_total as u64;
        a.ms += rec.ms;
    }
    groups
        .into_iter()
        .map(|((m, rho, omega), a)| {
            let n = a.n as f64;
            Aggregate {
                method: order[m].to_string(),
                rho: f64::from_bits(rho),
                omega,
                n: a.n,
                accuracy: a.h as f64 / n,
                r_accuracy: a.r as f64 / n,
                mean_acc_query: a.q as f64 / n,
                mean_acc_total: a.t as f64 / n,
                mean_ms: a.ms / n,
            }
        })
        .collect()
}

pub fn accuracy_of<'a>(aggs: &'a [Aggregate], method: &str, rho: f64, omega: usize) -> Option<&'a Aggregate> {
    aggs.iter().find(|a| a.method == method && a.rho == rho && a.omega == omega)
}

fn methods_of(aggs: &[Aggregate]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for a in aggs {
        if !out.contains(&a.method) {
            out.push(a.method.clone());
        }
    }
    out
}

/// Log-model fit of accuracy against rho, per method.
pub fn gaussian_trends(aggs: &[Aggregate]) -> Vec<(String, Trend)> {
    methods_of(aggs)
        .into_iter()
        .map(|m| {
            let pts: Vec<(f64, f64)> = aggs.iter().filter(|a| a.method == m).map(|a| (a.rho, a.accuracy)).collect();
            let t = fit_trend(&pts, TrendModel::Log);
            (m, t)
        })
        .collect()
}

/// Linear fit of mean time against the spike count, per method.
pub fn spike_time_trends(aggs: &[Aggregate]) -> Vec<(String, Trend)> {
    methods_of(aggs)
        .into_iter()
        .map(|m| {
            let pts: Vec<(f64, f64)> = aggs.iter().filter(|a| a.method == m).map(|a| (a.omega as f64, a.mean_ms)).collect();
            let t = fit_trend(&pts, TrendModel::Linear);
            (m, t)
        })
        .collect()
}

fn trend_line(t: &Trend) -> String {
    match t {
        Trend::Fitted(f) => match f.rho_star {
            Some(r) => format!("c={:.5} d={:.5} rho*={r} points={}", f.c, f.d, f.points),
            None => format!("c={:.5} d={:.5} points={}", f.c, f.d, f.points),
        },
        Trend::NoDecay => "no-decay".to_string(),
        Trend::Insufficient => "insufficient".to_string(),
    }
}

fn aggregate_table(out: &mut String, aggs: &[Aggregate]) {
    writeln!(out, "{:<7} {:>9} {:>5} {:>5} {:>8} {:>8} {:>10} {:>10} {:>9}", "method", "rho", "omega", "n", "a(h)", "a(r)", "acc_query", "acc_total", "ms")
        .unwrap();
    for a in aggs {
        writeln!(
            out,
            "{:<7} {:>9} {:>5} {:>5} {:>8.4} {:>8.4} {:>10.2} {:>10.2} {:>9.3}",
            a.method, a.rho, a.omega, a.n, a.accuracy, a.r_accuracy, a.mean_acc_query, a.mean_acc_total, a.mean_ms
        )
        .unwrap();
    }
}

fn read_if_present<R: crate::records::CsvRecord>(dir: &Path, name: &str, only: Option<&str>) -> Result<Option<Vec<R>>, Error> {
    let path = dir.join(name);
    if only.is_none_or(|o| o == name) && path.exists() {
        read_records(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Reads every experiment CSV found in `dir`, writes `summary.txt` (and
/// SVG charts when `plots` is set) and returns the summary text.
pub fn report(dir: &Path, plots: bool) -> Result<String, Error> {
    let out = summarize(dir, plots, None)?;
    let path = dir.join(SUMMARY);
    fs::write(&path, &out).map_err(|e| Error::io(&path, e))?;
    Ok(out)
}

/// Summary text of the experiment CSVs in `dir`, or of the single file
/// named by `only`.
pub fn summarize(dir: &Path, plots: bool, only: Option<&str>) -> Result<String, Error> {
    if !dir.is_dir() {
        return Err(Error::store(dir, "results directory does not exist"));
    }
    let mut out = String::new();

    if let Some(recs) = read_if_present::<QueryRecord>(dir, QUERY_CSV, only)? {
        writeln!(out, "== query step ==").unwrap();
        writeln!(out, "{:<7} {:>5} {:>7} {:>5} {:>9}", "method", "n", "f", "S", "ms").unwrap();
        let stats = query_stats(&recs);
        for s in &stats {
            writeln!(out, "{:<7} {:>5} {:>7.4} {:>5} {:>9.4}", s.method, s.n, s.f, s.s, s.mean_ms).unwrap();
        }
        if let Some(pyr) = stats.iter().find(|s| s.method == "PYR") {
            for s in stats.iter().filter(|s| s.method != "PYR") {
                let (z, p) = z_test_proportions(s.f, s.n, pyr.f, pyr.n, Tails::Two);
                writeln!(out, "f {} vs PYR: z={z:.3} p={p:.4}", s.method).unwrap();
            }
        }
        writeln!(out).unwrap();
    }

    if let Some(recs) = read_if_present::<PivotRecord>(dir, PIVOT_CSV, only)? {
        writeln!(out, "== pivot accesses (ambiguous first query) ==").unwrap();
        let stats = pivot_stats(&recs);
        for s in &stats {
            writeln!(
                out,
                "{:<7} n={:<5} obtained={:<5} mean_acc_to_r={:.2} mean_acc_query={:.2}",
                s.method, s.n, s.n_obtained, s.mean_acc_to_r, s.mean_acc_query
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        if plots {
            let bars: Vec<String> = stats.iter().map(|s| s.method.clone()).collect();
            let values = vec![stats.iter().map(|s| s.mean_acc_to_r).collect()];
            bar_chart(&dir.join("pivot.svg"), "Catalog accesses to obtain r", "mean accesses", &["rho=1e-4".into()], &bars, &values)?;
        }
    }

    if let Some(recs) = read_if_present::<TrialRecord>(dir, VERIFY_CSV, only)? {
        writeln!(out, "== verification ablation ==").unwrap();
        let aggs = aggregate(&recs);
        aggregate_table(&mut out, &aggs);
        let mut rhos: Vec<f64> = aggs.iter().map(|a| a.rho).collect();
        rhos.sort_by(f64::total_cmp);
        rhos.dedup();
        for base in ["PYR", "COM"] {
            for &rho in &rhos {
                let (Some(a), Some(b)) = (accuracy_of(&aggs, base, rho, 0), accuracy_of(&aggs, &format!("{base}-N"), rho, 0)) else {
                    continue;
                };
                let (z, p) = z_test_proportions(a.accuracy, a.n, b.accuracy, b.n, Tails::Two);
                writeln!(out, "{base} vs {base}-N at rho={rho}: z={z:.3} p={p:.4}").unwrap();
            }
        }
        writeln!(out).unwrap();
        if plots {
            let bars = methods_of(&aggs);
            let groups: Vec<String> = rhos.iter().map(|r| format!("rho={r}")).collect();
            let values: Vec<Vec<f64>> = rhos
                .iter()
                .map(|&r| bars.iter().map(|m| accuracy_of(&aggs, m, r, 0).map_or(f64::NAN, |a| a.accuracy)).collect())
                .collect();
            bar_chart(&dir.join("verify.svg"), "With and without verification", "a(h,b,r)", &groups, &bars, &values)?;
        }
    }

    if let Some(recs) = read_if_present::<TrialRecord>(dir, GAUSS_CSV, only)? {
        writeln!(out, "== gaussian noise ==").unwrap();
        let aggs = aggregate(&recs);
        aggregate_table(&mut out, &aggs);
        let trends = gaussian_trends(&aggs);
        for (m, t) in &trends {
            writeln!(out, "trend {m}: {}", trend_line(t)).unwrap();
        }
        writeln!(out).unwrap();
        if plots {
            let mut series = Vec::new();
            for (m, t) in &trends {
                let pts: Vec<(f64, f64)> =
                    aggs.iter().filter(|a| &a.method == m && a.rho > 0.0).map(|a| (a.rho.log10(), a.accuracy)).collect();
                if let Trend::Fitted(f) = t {
                    let x0 = f.rho_star.unwrap_or(1e-6);
                    let x1 = aggs.iter().filter(|a| &a.method == m).map(|a| a.rho).fold(x0, f64::max);
                    let line = [x0, x1].iter().map(|r| (r.log10(), f.c * r.ln() + f.d)).collect();
                    series.push(Series { name: format!("{m} trend"), points: line, dashed: true });
                }
                series.push(Series { name: m.clone(), points: pts, dashed: false });
            }
            line_chart(&dir.join("gaussian.svg"), "Accuracy under positional noise", "log10 rho (deg)", "a(h,b,r)", &series)?;
        }
    }

    if let Some(recs) = read_if_present::<TrialRecord>(dir, SPIKE_CSV, only)? {
        writeln!(out, "== spikes ==").unwrap();
        let aggs = aggregate(&recs);
        aggregate_table(&mut out, &aggs);
        for (m, t) in spike_time_trends(&aggs) {
            writeln!(out, "time trend {m}: {}", trend_line(&t)).unwrap();
        }
        writeln!(out).unwrap();
        if plots {
            let by_method = |f: fn(&Aggregate) -> f64| -> Vec<Series> {
                methods_of(&aggs)
                    .into_iter()
                    .map(|m| Series {
                        points: aggs.iter().filter(|a| a.method == m).map(|a| (a.omega as f64, f(a))).collect(),
                        name: m,
                        dashed: false,
                    })
                    .collect()
            };
            line_chart(&dir.join("spikes.svg"), "Accuracy with false stars", "spikes", "a(h,b,r)", &by_method(|a| a.accuracy))?;
            line_chart(&dir.join("spikes_time.svg"), "Time with false stars", "spikes", "ms", &by_method(|a| a.mean_ms))?;
        }
    }

    if let Some(recs) = read_if_present::<TuneRecord>(dir, TUNE_CSV, only)? {
        writeln!(out, "== sigma search ==").unwrap();
        let mut methods: Vec<&str> = Vec::new();
        for r in &recs {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
        }
        for m in methods {
            let subset: Vec<TuneRecord> = recs.iter().filter(|r| r.method == m).cloned().collect();
            if let Some(b) = crate::bench::best_sigma(&subset) {
                match b.sigma2 {
                    Some(s2) => writeln!(out, "{m}: sigma1={} sigma2={s2} unique={}", b.sigma1, b.unique),
                    None => writeln!(out, "{m}: sigma={} unique={}", b.sigma1, b.unique),
                }
                .unwrap();
            }
        }
        writeln!(out).unwrap();
    }
    Ok(out)
}
