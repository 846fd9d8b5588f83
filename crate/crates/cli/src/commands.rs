use phaselock::coupling::{
    compute_kc, default_eps, enumerate_fixed_points, existence_at, lower_bounds, scan_curve,
    upper_bound, SignVector,
};
use phaselock::format::g17;
use phaselock::simulator::{convergence_time, default_dt, InitialPhases};
use phaselock::{homogeneous_run, integrate, Error, FrequencySpec, SimConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::render::{fixed, json, num, text_block, Cell, Csv, Format};
use crate::{Failure, Report};

fn ok(body: String) -> Result<Report, Failure> {
    Ok(Report { body, negative: false })
}

pub fn bounds(spec: &FrequencySpec, format: Format) -> Report {
    let (lower_inf, lower_sigma) = lower_bounds(spec);
    let degenerate = spec.is_homogeneous();
    let upper = match upper_bound(spec) {
        Ok(u) => u,
        Err(Error::Degenerate(_)) => 0.0,
        Err(e) => unreachable!("upper_bound only fails on degenerate input: {}", e),
    };
    let body = match format {
        Format::Text => text_block(&[
            ("N", spec.n().to_string()),
            ("lower_inf", fixed(lower_inf)),
            ("lower_sigma", fixed(lower_sigma)),
            ("upper", fixed(upper)),
            ("degenerate", degenerate.to_string()),
        ]),
        Format::Csv => {
            let mut c = Csv::new(&["N", "lower_inf", "lower_sigma", "upper", "degenerate"]);
            c.row([
                Cell::I(spec.n() as u64),
                Cell::F(lower_inf),
                Cell::F(lower_sigma),
                Cell::F(upper),
                Cell::S(degenerate.to_string()),
            ]);
            c.finish()
        }
        Format::Json => json(&json!({
            "N": spec.n(),
            "lower_inf": num(lower_inf),
            "lower_sigma": num(lower_sigma),
            "upper": num(upper),
            "degenerate": degenerate,
        })),
    };
    Report { body, negative: false }
}

pub fn kc(spec: &FrequencySpec, eps: Option<f64>, format: Format) -> Result<Report, Failure> {
    let eps = eps.unwrap_or_else(|| default_eps(spec));
    let r = compute_kc(spec, eps)?;
    ok(match format {
        Format::Text => text_block(&[
            ("N", spec.n().to_string()),
            ("kc", fixed(r.kc)),
            ("u_star", fixed(r.u_star)),
            ("iterations", r.iterations.to_string()),
            ("eps", g17(r.tolerance)),
            ("lower_inf", fixed(r.lower_inf)),
            ("lower_sigma", fixed(r.lower_sigma)),
            ("upper", fixed(r.upper)),
            ("degenerate", r.degenerate.to_string()),
        ]),
        Format::Csv => {
            let mut c = Csv::new(&[
                "N", "kc", "u_star", "iterations", "eps", "lower_inf", "lower_sigma", "upper",
                "degenerate",
            ]);
            c.row([
                Cell::I(spec.n() as u64),
                Cell::F(r.kc),
                Cell::F(r.u_star),
                Cell::I(r.iterations.into()),
                Cell::F(r.tolerance),
                Cell::F(r.lower_inf),
                Cell::F(r.lower_sigma),
                Cell::F(r.upper),
                Cell::S(r.degenerate.to_string()),
            ]);
            c.finish()
        }
        Format::Json => json(&json!({
            "N": spec.n(),
            "kc": num(r.kc),
            "u_star": num(r.u_star),
            "iterations": r.iterations,
            "eps": num(r.tolerance),
            "lower_inf": num(r.lower_inf),
            "lower_sigma": num(r.lower_sigma),
            "upper": num(r.upper),
            "degenerate": r.degenerate,
        })),
    })
}

/// A single `k` exits 1 when nothing exists; a sweep exits 1 only if no grid point admits a fixed point.
pub fn existence(spec: &FrequencySpec, grid: &[f64], format: Format) -> Result<Report, Failure> {
    let found: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&k| existence_at(spec, k))
        .collect::<phaselock::Result<_>>()?;
    let negative = found.iter().all(Option::is_none);
    let body = match format {
        Format::Text if grid.len() == 1 => match found[0] {
            Some(beta) => format!("exists (beta={})\n", fixed(beta)),
            None => "none\n".to_string(),
        },
        Format::Text => grid
            .iter()
            .zip(&found)
            .map(|(k, b)| match b {
                Some(beta) => format!("k={}: exists (beta={})\n", fixed(*k), fixed(*beta)),
                None => format!("k={}: none\n", fixed(*k)),
            })
            .collect(),
        Format::Csv => {
            let mut c = Csv::new(&["k", "exists", "beta"]);
            for (k, b) in grid.iter().zip(&found) {
                c.row([
                    Cell::F(*k),
                    Cell::S(b.is_some().to_string()),
                    b.map_or(Cell::Empty, Cell::F),
                ]);
            }
            c.finish()
        }
        Format::Json => {
            let rows: Vec<_> = grid
                .iter()
                .zip(&found)
                .map(|(k, b)| json!({"k": num(*k), "exists": b.is_some(), "beta": b.map(num)}))
                .collect();
            json(&json!(rows))
        }
    };
    Ok(Report { body, negative })
}

fn signs(a: &SignVector) -> String {
    a.as_slice().iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

pub fn fixed_points(spec: &FrequencySpec, k: f64, max_n: usize, format: Format) -> Result<Report, Failure> {
    let e = enumerate_fixed_points(spec, k, max_n)?;
    let negative = e.certificates.is_empty();
    let n = spec.n();
    let body = match format {
        Format::Text => {
            let mut s = format!(
                "N = {}, k = {}, certificates = {}, rejected = {}\n",
                n,
                fixed(k),
                e.certificates.len(),
                e.rejected
            );
            if negative {
                s.push_str("none\n");
            }
            for (i, c) in e.certificates.iter().enumerate() {
                s.push_str(&format!(
                    "{:>4}  {}  beta={}  R={}  residual={:.3e}\n",
                    i,
                    signs(&c.a),
                    fixed(c.beta),
                    fixed(c.order_r),
                    c.residual_inf
                ));
            }
            for class in &e.classes {
                let members: Vec<String> = class.members.iter().map(|m| m.to_string()).collect();
                s.push_str(&format!("class R={}: {}\n", fixed(class.order_r), members.join(" ")));
            }
            s
        }
        Format::Csv => {
            let xs: Vec<String> = (1..=n).map(|i| format!("x{}", i)).collect();
            let mut header = vec!["index", "signs", "beta", "R", "residual"];
            header.extend(xs.iter().map(String::as_str));
            let mut c = Csv::new(&header);
            for (i, cert) in e.certificates.iter().enumerate() {
                let mut row = vec![
                    Cell::I(i as u64),
                    Cell::S(signs(&cert.a)),
                    Cell::F(cert.beta),
                    Cell::F(cert.order_r),
                    Cell::F(cert.residual_inf),
                ];
                row.extend(cert.x_star.as_slice().iter().map(|&x| Cell::F(x)));
                c.row(row);
            }
            c.finish()
        }
        Format::Json => {
            let certs: Vec<_> = e
                .certificates
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "index": i,
                        "signs": signs(&c.a),
                        "beta": num(c.beta),
                        "R": num(c.order_r),
                        "residual": num(c.residual_inf),
                        "x": c.x_star.as_slice().iter().map(|&x| num(x)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let classes: Vec<_> = e
                .classes
                .iter()
                .map(|c| json!({"R": num(c.order_r), "members": c.members}))
                .collect();
            json(&json!({
                "N": n,
                "k": num(k),
                "rejected": e.rejected,
                "certificates": certs,
                "classes": classes,
            }))
        }
    };
    Ok(Report { body, negative })
}

pub enum SimSource {
    Spec(FrequencySpec),
    Homogeneous(usize),
}

pub struct SimParams {
    pub k: f64,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub record_every: usize,
    pub seed: u64,
    pub init: Option<Vec<f64>>,
    pub threshold: Option<f64>,
}

pub fn simulate(source: SimSource, p: &SimParams, format: Format) -> Result<Report, Failure> {
    let mut config = SimConfig::new(p.k, p.t_end)
        .with_dt(p.dt.unwrap_or_else(|| default_dt(p.k)))
        .with_record_every(p.record_every)
        .with_seed(p.seed);
    if let Some(x) = &p.init {
        config = config.with_init(InitialPhases::Given(x.clone()));
    }
    let (n, trace) = match source {
        SimSource::Homogeneous(n) => (n, homogeneous_run(n, p.k, &config)?),
        SimSource::Spec(spec) => (spec.n(), integrate(&spec, &config)?),
    };
    let t_conv = p.threshold.map(|th| convergence_time(&trace, th));
    let body = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).expect("writing to memory");
            String::from_utf8(buf).expect("ascii csv")
        }
        Format::Json => json(&json!({
            "N": n,
            "k": num(p.k),
            "dt": num(config.dt),
            "t_end": num(p.t_end),
            "seed": p.seed,
            "converged": trace.converged,
            "threshold": p.threshold.map(num),
            "convergence_time": t_conv.flatten().map(num),
            "t": trace.times.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "L": trace.l.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "D": trace.d.as_ref().map(|d| d.iter().map(|&x| num(x)).collect::<Vec<_>>()),
            "residual": trace.residual.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "final_state": trace.final_state.as_slice().iter().map(|&x| num(x)).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let last = trace.l.len() - 1;
            let mut rows = vec![
                ("N", n.to_string()),
                ("k", fixed(p.k)),
                ("dt", g17(config.dt)),
                ("samples", trace.times.len().to_string()),
                ("L(t0)", fixed(trace.l[0])),
                ("L(t_end)", fixed(trace.l[last])),
                ("residual(t_end)", format!("{:.3e}", trace.residual[last])),
                ("converged", trace.converged.to_string()),
            ];
            if let Some(t) = t_conv {
                rows.push(("convergence_time", t.map_or("never".into(), fixed)));
            }
            let mut s = text_block(&rows);
            s.push_str(&format!("\n{:>14} {:>14} {:>14} {:>12}\n", "t", "L", "D", "residual"));
            for i in 0..trace.times.len() {
                let d = trace.d.as_ref().map_or("-".into(), |d| format!("{:.10}", d[i]));
                s.push_str(&format!(
                    "{:>14.6} {:>14.10} {:>14} {:>12.3e}\n",
                    trace.times[i], trace.l[i], d, trace.residual[i]
                ));
            }
            s
        }
    };
    ok(body)
}

pub fn scan(spec: &FrequencySpec, k: f64, samples: usize, format: Format) -> Result<Report, Failure> {
    let rows = scan_curve(spec, k, samples)?;
    ok(match format {
        Format::Csv => {
            let mut c = Csv::new(&["beta", "P", "h"]);
            for r in &rows {
                c.row([Cell::F(r.beta), Cell::F(r.p), Cell::F(r.h)]);
            }
            c.finish()
        }
        Format::Json => {
            let list: Vec<_> = rows
                .iter()
                .map(|r| json!({"beta": num(r.beta), "P": num(r.p), "h": num(r.h)}))
                .collect();
            json(&json!(list))
        }
        Format::Text => {
            let mut s = format!("{:>14} {:>14} {:>14}\n", "beta", "P", "h");
            for r in &rows {
                s.push_str(&format!("{:>14.10} {:>14.10} {:>14.10}\n", r.beta, r.p, r.h));
            }
            s
        }
    })
}
