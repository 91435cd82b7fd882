// Acceptance gate: one PASS/FAIL line per criterion.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use special_cube::algebra::{
    abelianization_invariants, canonical_images, crossing_orbit_growth, is_periodic, order_sequence,
};
use special_cube::complex::{
    build_quotient_complex, check_npc, NpcFailureKind, SquareComplex, DEFAULT_SIZE_CAP,
};
use special_cube::fixtures;
use special_cube::group::{GroupParams, Subgroup};
use special_cube::hyperplane::{
    interaction_report, revalidate_crossing, revalidate_one_sided, revalidate_osculation,
};
use special_cube::verifier::{
    all_empty, check_structural_conditions, closed_form_key, derive_stabilizer_from_loops, verify,
};

const PAIRS: [(usize, u32); 5] = [(4, 2), (4, 3), (5, 2), (5, 3), (6, 2)];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(m: usize, k: u32) -> GroupParams {
    GroupParams::new(m, k).expect("valid parameters")
}

/// Truncation with span `[-(2k+2), 2k+2]`, checked with margin `k`.
fn acceptance_build(g: &GroupParams) -> SquareComplex {
    let h = 2 * g.k() as i64 + 2;
    build_quotient_complex(g, -h, h, DEFAULT_SIZE_CAP).expect("build within cap")
}

fn specialness() -> Check {
    let mut notes = Vec::new();
    for (m, k) in PAIRS {
        let g = p(m, k);
        let start = Instant::now();
        let certs = verify(&g, DEFAULT_SIZE_CAP).map_err(|e| e.to_string())?;
        ensure(all_empty(&certs), || format!("{g}: non-empty certificate"))?;
        let x = acceptance_build(&g);
        let h = 2 * k as i64 + 2;
        let margin = k as i64;
        let core = interaction_report(&x)
            .core_restrict(&x, -h + margin, h - margin)
            .map_err(|e| e.to_string())?;
        let v = &core.violations;
        ensure(v.is_empty(), || {
            format!("{g}: {} core violations", v.total())
        })?;
        ensure(check_npc(&x).pass, || format!("{g}: link check failed"))?;
        notes.push(format!("{m},{k}:{:.1}s", start.elapsed().as_secs_f64()));
    }
    Ok(notes.join(" "))
}

fn stabilisers() -> Check {
    let mut n = 0;
    for m in 3..=8 {
        for k in [2, 3, 5] {
            let g = p(m, k);
            for j in 1..=m {
                let derived = derive_stabilizer_from_loops(&g, j).map_err(|e| e.to_string())?;
                let expected = Subgroup::cyclic(&(&g.sigma(g.cyc(j, -1)) * &g.sigma(j)));
                ensure(derived == expected, || {
                    format!("{g} j={j}: <{}>", derived.generator())
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} edge types"))
}

fn closed_form() -> Check {
    let mut pairs = 0u64;
    for (m, k) in [(4, 2), (4, 3)] {
        let g = p(m, k);
        let x = acceptance_build(&g);
        let built = x.built().expect("typed cells");
        let part = interaction_report(&x).partition;
        let h = 2 * k as i64 + 2 - k as i64;
        let core: Vec<usize> = (0..x.edges().len())
            .filter(|&e| built.edges[e].height.abs() <= h)
            .collect();
        // Equal classes iff equal keys, checked as a bijection between labels.
        let mut by_class = HashMap::new();
        let mut by_key = HashMap::new();
        for &e in &core {
            let key = closed_form_key(&g, &built.edges[e]);
            let class = part.class_of(e);
            let a = by_class.entry(class).or_insert_with(|| key.clone());
            ensure(*a == key, || {
                format!("{g}: class {class} has two closed forms")
            })?;
            let b = by_key.entry(key).or_insert(class);
            ensure(*b == class, || {
                format!("{g}: closed form split across classes")
            })?;
        }
        pairs += (core.len() as u64).pow(2);
    }
    Ok(format!("{pairs} core edge pairs"))
}

fn abelianisation() -> Check {
    let mut seen = Vec::new();
    for (m, k) in PAIRS {
        let a = abelianization_invariants(&p(m, k));
        ensure(
            a.torsion == vec![BigInt::from(k)] && a.free_rank == m - 1,
            || format!("({m},{k}): {a}"),
        )?;
        ensure(!seen.contains(&a), || format!("({m},{k}) repeats {a}"))?;
        seen.push(a);
    }
    Ok(seen
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(", "))
}

fn orbit_growth() -> Check {
    let g = p(4, 2);
    let mut prev = 0;
    for r in 0..=50u64 {
        let c = crossing_orbit_growth(&g, r).map_err(|e| e.to_string())?;
        ensure(c == 2 * r + 1, || format!("r={r}: {c}"))?;
        ensure(r == 0 || c > prev, || format!("r={r}: not increasing"))?;
        prev = c;
    }
    Ok(format!("count(50) = {prev}"))
}

fn torsion_probe() -> Check {
    for (m, k) in PAIRS {
        let g = p(m, k);
        let k = k as i64;
        let seq =
            order_sequence(&canonical_images(&g), -4 * k..=4 * k).map_err(|e| e.to_string())?;
        let period = is_periodic(&seq, 2 * k as usize).map_err(|e| e.to_string())?;
        ensure(period == Some(k as usize), || {
            format!("{g}: period {period:?}")
        })?;
        for i in -4 * k..=4 * k {
            ensure((seq.get(i) == Some(1)) == (i % k == 0), || {
                format!("{g}: value at {i}")
            })?;
        }
    }
    Ok("period k, trivial exactly at multiples of k".into())
}

fn negative_controls() -> Check {
    let x = fixtures::klein_bottle();
    let r = interaction_report(&x);
    ensure(r.violations.one_sided.len() == 1, || {
        "klein bottle: one-sided class missing".into()
    })?;
    ensure(
        r.violations
            .one_sided
            .iter()
            .all(|w| revalidate_one_sided(&x, w)),
        || "one-sided witness fails".into(),
    )?;

    let x = fixtures::osculating_wedge();
    let r = interaction_report(&x);
    let v = &r.violations;
    ensure(!v.self_osc.is_empty() && !v.inter_osc.is_empty(), || {
        "wedge: no osculation violation".into()
    })?;
    ensure(
        v.self_osc
            .iter()
            .all(|w| revalidate_osculation(&x, &r.partition, w))
            && v.inter_osc.iter().all(|w| {
                revalidate_crossing(&x, &r.partition, &w.crossing)
                    && revalidate_osculation(&x, &r.partition, &w.osculation)
            }),
        || "wedge witness fails".into(),
    )?;

    let npc = check_npc(&fixtures::link_triangle());
    ensure(
        !npc.pass
            && npc
                .failures
                .iter()
                .any(|f| f.kind == NpcFailureKind::Triangle && f.vertex == "o"),
        || "link triangle: no failure at o".into(),
    )?;
    Ok(format!(
        "one_sided 1, self_osc {}, inter_osc {}, link triangles {}",
        v.self_osc.len(),
        v.inter_osc.len(),
        npc.failures.len()
    ))
}

fn structural() -> Check {
    for (m, k) in PAIRS {
        let g = p(m, k);
        for cert in check_structural_conditions(&acceptance_build(&g)) {
            ensure(cert.empty, || {
                format!(
                    "{g}: {} has {} witnesses",
                    cert.case_id,
                    cert.witnesses.len()
                )
            })?;
        }
    }
    Ok("no same-type corners, all parities 0".into())
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("special-cube-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let complex = dir.join("x.json");
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/osculating_wedge.json"
    );
    let cx = complex.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "--json", "build", "--m", "4", "--k", "2", "--hmin", "-6", "--hmax", "6",
        ],
        vec!["--json", "verify", "--m", "4", "--k", "3"],
        vec![
            "--json",
            "verify",
            "--m",
            "4",
            "--k",
            "2",
            "--cross-validate",
        ],
        vec!["--json", "check", fixture],
        vec!["--json", "abelianize", "--m", "5", "--k", "3"],
        vec!["--json", "growth", "--m", "4", "--k", "2", "--radius", "50"],
        vec!["--json", "torsion-probe", "--m", "6", "--k", "2"],
    ];
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_special-cube"))
            .args(args)
            .env_remove("SPECIAL_CUBE_SIZE_CAP")
            .output()
            .expect("binary runs")
    };
    let mut n = 0;
    for args in &commands {
        let (a, b) = (run(args), run(args));
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || {
            format!("{args:?} differs")
        })?;
        n += 1;
    }
    // Built file, then its check report.
    let build = [
        "build", "--m", "4", "--k", "2", "--hmin", "-6", "--hmax", "6", "-o", cx,
    ];
    run(&build);
    let first = std::fs::read(&complex).map_err(|e| e.to_string())?;
    run(&build);
    let second = std::fs::read(&complex).map_err(|e| e.to_string())?;
    ensure(first == second, || "built files differ".into())?;
    let check = ["--json", "check", cx, "--margin", "2"];
    let (a, b) = (run(&check), run(&check));
    ensure(a.stdout == b.stdout && a.status.code() == Some(0), || {
        "check report differs or is dirty".into()
    })?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical", n + 2))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("specialness", specialness),
        ("stabiliser formula", stabilisers),
        ("closed-form hyperplanes", closed_form),
        ("abelianisation", abelianisation),
        ("orbit growth", orbit_growth),
        ("torsion probe", torsion_probe),
        ("negative controls", negative_controls),
        ("structural conditions", structural),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
