//! Batch command-line frontend: generator printing, relation verification,
//! shortcut words, bounded-generation decomposition, parabolic normal forms,
//! short-vector sweeps, adaptive triangulations, the solvable-group checker,
//! and a desk-scale area search.
//!
//! Exit codes: 0 all requested checks passed, 1 a check failed (with a
//! machine-readable report on stdout), 2 usage errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::One;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spz_core::boundedgen::{sp_decompose, sp_decompose_short};
use spz_core::liecheck::{dct_report, report_csv_header, report_csv_row};
use spz_core::parabolic::omega_normal_form;
use spz_core::reduction::{
    adaptive_triangulate, depth_proxy, positive_roots, rshort_check, triangulation_json,
    triangulation_report, triangulation_svg, v_lattice, GridFn, RegimeOutcome, SiegelPoint,
};
use spz_core::roots::{all_roots, HalfRoot, Root, SubgroupFrame};
use spz_core::shortcuts::{length_profile, profile_csv, shortcut};
use spz_core::spmat::{self, elementary, Int, Rat};
use spz_core::unipotent::{check_umanip, UmanipCase};
use spz_core::words::{area_search, commutator_factors, relator_set, Word};

#[derive(Parser)]
#[command(name = "spz", version, about = "Exact symplectic group toolkit")]
struct Cli {
    /// Worker threads for sweeps (also SPZ_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print an elementary symplectic matrix
    Gen {
        #[arg(long)]
        p: usize,
        /// Root in text form, e.g. "+1-2" or "2*+1"
        #[arg(long)]
        root: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Exhaustively verify the relation table and the unipotent coordinate
    /// identities at a given rank
    VerifyRelations {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 3)]
        xbound: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Produce a logarithmic-length word for an elementary matrix
    Shortcut {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        root: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Also emit a CSV length profile over powers of two
        #[arg(long, default_value_t = false)]
        profile: bool,
    },
    /// Decompose a symplectic block matrix into elementary factors
    Decompose {
        /// Matrix file in the text format
        #[arg(long)]
        file: String,
        /// Block indices, e.g. "1,2" for the pairs ±1, ±2
        #[arg(long)]
        t: String,
    },
    /// Normal form of a parabolic element
    Omega {
        #[arg(long)]
        file: String,
        /// Isotropic part, signed indices like "+1,-2"
        #[arg(long)]
        s: String,
        /// Symplectic part indices like "3,4"
        #[arg(long)]
        t: String,
    },
    /// Hermite basis of the sublattice generated by short vectors
    Vlattice {
        /// Rational matrix file in the text format
        #[arg(long)]
        file: String,
        /// Radius, e.g. "3/2"
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 50)]
        search_box: i64,
    },
    /// Seeded sweep of the short-vector regime predictions
    RshortSweep {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constant for the gap regime; calibrated upward when absent
        #[arg(long)]
        c: Option<u64>,
        #[arg(long, default_value_t = 50)]
        search_box: i64,
    },
    /// Adaptive triangulation of [0,N]^2 for a seeded Lipschitz gauge
    Triangulate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional SVG output path
        #[arg(long)]
        svg: Option<String>,
    },
    /// Solvable-group criterion over a grid of frames
    DctCheck {
        #[arg(long, default_value_t = 5)]
        smax: usize,
        #[arg(long, default_value_t = 3)]
        tmax: usize,
        #[arg(long, default_value_t = 3)]
        smin: usize,
        #[arg(long, default_value_t = 1)]
        tmin: usize,
    },
    /// Desk-scale area search for a relation
    Area {
        #[arg(long)]
        p: usize,
        /// Word in the text format, e.g. "e(+1-2) e(+1+2) e(+1-2)^-1 e(+1+2)^-1 e(2*+1)^-1 e(2*+1)^-1"
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        xbound: i64,
        #[arg(long, default_value_t = 24)]
        max_len: usize,
        #[arg(long, default_value_t = 200_000)]
        max_cost: usize,
    },
}

fn parse_int(s: &str) -> anyhow::Result<Int> {
    Ok(s.parse::<BigInt>()?)
}

fn parse_rat(s: &str) -> anyhow::Result<Rat> {
    Ok(spz_core::spmat::parse_rat(s)?)
}

fn parse_s_spec(s: &str) -> anyhow::Result<Vec<(i8, usize)>> {
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for tok in s.split(',') {
        let h: HalfRoot = tok.trim().parse()?;
        out.push((h.sign(), h.index()));
    }
    Ok(out)
}

fn parse_t_spec(s: &str) -> anyhow::Result<Vec<usize>> {
    let mut out = Vec::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for tok in s.split(',') {
        out.push(tok.trim().trim_start_matches('±').parse::<usize>()?);
    }
    Ok(out)
}

fn emit(out: &Option<String>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

/// Runs all the relation-table checks at the given rank; returns failures.
fn verify_relations(p: usize, xbound: i64, seed: u64, samples: usize) -> (usize, String) {
    let roots = all_roots(p);
    let mut checks = 0usize;
    let mut failures = 0usize;
    // additivity
    for alpha in &roots {
        for x in -xbound..=xbound {
            for y in -xbound..=xbound {
                checks += 1;
                let lhs = elementary(p, alpha, &Int::from(x))
                    .mul(&elementary(p, alpha, &Int::from(y)));
                if lhs != elementary(p, alpha, &Int::from(x + y)) {
                    failures += 1;
                }
            }
        }
    }
    // commutator table, including the exact two-term tails
    for alpha in &roots {
        for beta in &roots {
            if alpha == beta || *beta == alpha.negate() {
                continue;
            }
            for x in 1..=xbound {
                for y in 1..=xbound {
                    for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        checks += 1;
                        if commutator_factors(
                            p,
                            alpha,
                            beta,
                            &Int::from(sx * x),
                            &Int::from(sy * y),
                        )
                        .is_err()
                        {
                            failures += 1;
                        }
                    }
                }
            }
        }
    }
    // unipotent coordinate identities on a seeded frame family
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if p >= 2 {
        let frame = SubgroupFrame::from_indices(
            p,
            &[(1, 1)],
            &(2..=p).collect::<Vec<_>>(),
        )
        .unwrap();
        let s_rows: Vec<HalfRoot> = frame.s_list();
        let t_rows: Vec<HalfRoot> = frame.t_list();
        for _ in 0..samples {
            let mut v = vec![Int::from(0); 2 * p];
            let mut vp = vec![Int::from(0); 2 * p];
            let mut w = vec![Int::from(0); 2 * p];
            let mut wp = vec![Int::from(0); 2 * p];
            for h in &s_rows {
                v[h.row(p)] = Int::from(rng.gen_range(-5i64..=5));
                vp[h.row(p)] = Int::from(rng.gen_range(-5i64..=5));
            }
            for h in &t_rows {
                w[h.row(p)] = Int::from(rng.gen_range(-5i64..=5));
                wp[h.row(p)] = Int::from(rng.gen_range(-5i64..=5));
            }
            checks += 2;
            match check_umanip(&frame, UmanipCase::InverseLaws { v: &v, w: &w, vp: &vp }) {
                Ok(true) => {}
                _ => failures += 1,
            }
            match check_umanip(&frame, UmanipCase::Commutator { v: &v, w: &w, vp: &vp, wp: &wp })
            {
                Ok(true) => {}
                _ => failures += 1,
            }
        }
    }
    let report = format!(
        "{{\"p\":{p},\"xbound\":{xbound},\"seed\":{seed},\"checks\":{checks},\"failures\":{failures}}}\n"
    );
    (failures, report)
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("SPZ_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().ok();
    }

    match cli.command {
        Command::Gen { p, root, x, format } => {
            let alpha = Root::parse(&root, p)?;
            let xv = parse_int(&x)?;
            let m = elementary(p, &alpha, &xv);
            let content = match format.as_str() {
                "json" => format!("{}\n", spmat::to_json(&m)),
                _ => spmat::write_text(&m),
            };
            emit(&cli.out, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyRelations { p, xbound, seed, samples } => {
            let (failures, report) = verify_relations(p, xbound, seed, samples);
            emit(&cli.out, &report)?;
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Shortcut { p, root, x, profile } => {
            let alpha = Root::parse(&root, p)?;
            let xv = parse_int(&x)?;
            let plan = shortcut(&alpha, &xv)?;
            let mut content = format!("{}\n{}\n", plan.word, plan.to_json());
            if profile {
                let xs: Vec<Int> = (1..=40u32).map(|k| Int::from(2u64).pow(k)).collect();
                content.push_str(&profile_csv(&length_profile(&alpha, &xs)?));
            }
            emit(&cli.out, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose { file, t } => {
            let m = spmat::read_text_int(&std::fs::read_to_string(&file)?)?;
            let p = m.rank_p()?;
            let frame = SubgroupFrame::from_indices(p, &[], &parse_t_spec(&t)?)?;
            let (dec, word) = sp_decompose_short(&m, &frame)?;
            let reconstruction_ok = {
                let check = sp_decompose(&m, &frame)?;
                check.target == m
            };
            let content = format!(
                "{{\"factors\":{},\"elementary_count\":{},\"shortcut_length\":{},\"reconstruction\":{} }}\n{}\nfactors,elementary_count,shortcut_length\n{},{},{}\n",
                dec.factors_json(),
                dec.elementary_count,
                dec.shortcut_length,
                reconstruction_ok,
                word,
                dec.factors.len(),
                dec.elementary_count,
                dec.shortcut_length
            );
            emit(&cli.out, &content)?;
            Ok(if reconstruction_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Omega { file, s, t } => {
            let m = spmat::read_text_int(&std::fs::read_to_string(&file)?)?;
            let p = m.rank_p()?;
            let frame =
                SubgroupFrame::from_indices(p, &parse_s_spec(&s)?, &parse_t_spec(&t)?)?;
            let rep = omega_normal_form(&m, &frame)?;
            let ok = rep.word.evaluate() == m;
            let content = format!(
                "{}\n{{\"ok\":{},\"gl_len\":{},\"sp_len\":{},\"n_len\":{},\"total\":{},\"split\":{}}}\n",
                rep.word,
                ok,
                rep.gl_len,
                rep.sp_len,
                rep.n_len,
                rep.word.len(),
                rep.split.to_json()
            );
            emit(&cli.out, &content)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Vlattice { file, r, search_box } => {
            let x = spmat::read_text_rat(&std::fs::read_to_string(&file)?)?;
            let rv = parse_rat(&r)?;
            let basis = v_lattice(&x, &rv, search_box)?;
            let rows: Vec<String> = basis
                .iter()
                .map(|row| {
                    let entries: Vec<String> = row.iter().map(|e| e.to_string()).collect();
                    format!("[{}]", entries.join(","))
                })
                .collect();
            emit(&cli.out, &format!("[{}]\n", rows.join(",")))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::RshortSweep { p, eps, count, seed, c, search_box } => {
            let epsv = parse_rat(&eps)?;
            let c_val = Rat::from_integer(Int::from(c.unwrap_or(8)));
            let jobs: Vec<u64> = (0..count as u64).collect();
            let results: Vec<(u64, String, bool)> = jobs
                .par_iter()
                .map(|&k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
                    let part_a = k % 2 == 0;
                    let (pt, i, r) = seeded_regime_point(p, &epsv, &c_val, part_a, &mut rng);
                    let outcome = rshort_check(&pt, i, &r, &c_val, search_box);
                    let proxy = depth_proxy(&pt, &Rat::from_integer(Int::from(2))).unwrap();
                    let (label, ok) = match outcome {
                        Ok(RegimeOutcome::Confirmed) => ("confirmed", true),
                        Ok(RegimeOutcome::Refuted) => ("refuted", false),
                        Ok(RegimeOutcome::OutsideRegime) => ("outside", false),
                        Err(_) => ("error", false),
                    };
                    (
                        k,
                        format!(
                            "{},{},{},{},{},{}",
                            k,
                            if part_a { "gap" } else { "last_block" },
                            i,
                            r,
                            label,
                            proxy
                        ),
                        ok,
                    )
                })
                .collect();
            let mut sorted = results;
            sorted.sort_by_key(|(k, _, _)| *k);
            let ok = sorted.iter().all(|(_, _, ok)| *ok);
            let mut content =
                String::from("sample,regime,i,r,outcome,depth_proxy_log2\n");
            for (_, row, _) in &sorted {
                content.push_str(row);
                content.push('\n');
            }
            emit(&cli.out, &content)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Triangulate { n, seed, svg } => {
            let h = seeded_gauge(n, seed);
            let t = adaptive_triangulate(n, &h)?;
            let rep = triangulation_report(&t);
            let mut content = triangulation_json(&t);
            content.push('\n');
            content.push_str(&format!(
                "{{\"triangles\":{},\"count_over_n2\":\"{}\",\"squared_sum_over_n2\":\"{}\"}}\n",
                rep.triangles, rep.count_over_n2, rep.squared_sum_over_n2
            ));
            if let Some(path) = svg {
                std::fs::write(path, triangulation_svg(&t))?;
            }
            emit(&cli.out, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::DctCheck { smax, tmax, smin, tmin } => {
            let mut grid = Vec::new();
            for s_size in smin..=smax {
                for t_pairs in tmin..=tmax {
                    grid.push((s_size, t_pairs));
                }
            }
            let rows: Vec<(usize, usize, String, bool)> = grid
                .par_iter()
                .map(|&(s_size, t_pairs)| {
                    let p = s_size + t_pairs;
                    let s: Vec<(i8, usize)> = (1..=s_size).map(|i| (1i8, i)).collect();
                    let t: Vec<usize> = (s_size + 1..=p).collect();
                    let frame = SubgroupFrame::from_indices(p, &s, &t).unwrap();
                    let rep = dct_report(&frame).unwrap();
                    (s_size, t_pairs, report_csv_row(&frame, &rep), rep.verdict)
                })
                .collect();
            let mut sorted = rows;
            sorted.sort();
            let all_true = sorted.iter().all(|(_, _, _, v)| *v);
            let mut content = format!("{}\n", report_csv_header());
            for (_, _, row, _) in &sorted {
                content.push_str(row);
                content.push('\n');
            }
            emit(&cli.out, &content)?;
            Ok(if all_true { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Area { p, word, xbound, max_len, max_cost } => {
            let w = Word::parse(&word, p)?;
            let relators = relator_set(p, xbound)?;
            let area = area_search(&w, &relators, max_len, max_cost)?;
            let content = match area {
                Some(a) => format!("{{\"area\":{a}}}\n"),
                None => "{\"area\":null}\n".to_string(),
            };
            emit(&cli.out, &content)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Seeded Siegel point in one of the two regimes, with the matching gap
/// index and radius.
fn seeded_regime_point(
    p: usize,
    eps: &Rat,
    c: &Rat,
    part_a: bool,
    rng: &mut ChaCha8Rng,
) -> (SiegelPoint, usize, Rat) {
    let mut n_coords = BTreeMap::new();
    for alpha in positive_roots(p) {
        n_coords.insert(alpha, Rat::new(Int::from(rng.gen_range(-32i64..=32)), Int::from(64)));
    }
    if part_a && p >= 2 {
        let i = rng.gen_range(1..p);
        let hi = Rat::from_integer(Int::from(2)) * c.clone() * c.clone() * c.clone();
        let lo = c.clone();
        let a: Vec<Rat> =
            (0..p).map(|j| if j < i { hi.clone() } else { lo.clone() }).collect();
        let r = Rat::new(Int::from(3), Int::from(2)) * c.clone() * c.clone();
        let pt = SiegelPoint::new(p, eps.clone(), n_coords, a).unwrap();
        (pt, i, r)
    } else {
        let a: Vec<Rat> = (0..p)
            .map(|j| {
                Rat::from_integer(Int::from(2i64.pow((p - j) as u32))) * c.clone()
            })
            .collect();
        let pt = SiegelPoint::new(p, eps.clone(), n_coords, a).unwrap();
        (pt, p, Rat::one())
    }
}

/// Seeded 1-Lipschitz gauge on the grid: random integer heights relaxed to
/// the Lipschitz cone, floored at 1.
fn seeded_gauge(n: usize, seed: u64) -> GridFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals: Vec<Rat> = (0..(n + 1) * (n + 1))
        .map(|_| Rat::from_integer(Int::from(rng.gen_range(1..=(2 * n).max(2) as i64))))
        .collect();
    for _ in 0..2 * n + 2 {
        for y in 0..=n {
            for x in 0..=n {
                let mut best = vals[y * (n + 1) + x].clone();
                let neighbors: Vec<(usize, usize)> = [
                    (x.wrapping_sub(1), y),
                    (x + 1, y),
                    (x, y.wrapping_sub(1)),
                    (x, y + 1),
                ]
                .into_iter()
                .filter(|&(a, b)| a <= n && b <= n)
                .collect();
                for (a, b) in neighbors {
                    let lim = vals[b * (n + 1) + a].clone() + Rat::one();
                    if best > lim {
                        best = lim;
                    }
                }
                vals[y * (n + 1) + x] = best.max(Rat::one());
            }
        }
    }
    GridFn::new(n, vals).expect("relaxed gauge is valid")
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
