//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always show; exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use num_traits::Zero;
use superport::forest::{forest_sign, is_relatively_valid, is_valid};
use superport::linalg::{int, ratio};
use superport::random::{
    random_circuit, random_conductance, random_network, random_xyz, rng, NetworkShape, SeededRng,
};
use superport::verify::{
    box_h, cayley, generalized_cayley, run_campaign, CampaignOptions, TreePart,
};
use superport::{
    c2l, electrical_response, format_rational, response_from_k, superport_response, Execution,
    ForestEnumerator, Rational, Report, SuperportNetwork, Theorem, Verifier, DEFAULT_CAP,
};

type Check = Result<String, String>;

fn tuple(r: &mut SeededRng) -> [Rational; 4] {
    [(); 4].map(|_| random_conductance(r, 12))
}

fn net(n: usize, edges: &[(usize, usize, &Rational)], sizes: &[usize]) -> SuperportNetwork {
    SuperportNetwork::new(n, edges.iter().map(|&(u, v, c)| (u, v, c.clone())), sizes).unwrap()
}

fn all_passed(reports: &[Report]) -> Check {
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => Err(r.to_string()),
        None => Ok(format!("{} reports", reports.len())),
    }
}

fn shape(need_non_root: bool) -> NetworkShape {
    NetworkShape {
        need_non_root,
        ..NetworkShape::default()
    }
}

fn networks(seed: u64, count: usize, need_non_root: bool) -> Vec<SuperportNetwork> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_network(&mut r, &shape(need_non_root)))
        .collect()
}

fn w_network() -> Check {
    let mut r = rng(1);
    for _ in 0..40 {
        let [a, b, c, d] = tuple(&mut r);
        let w = net(
            5,
            &[(0, 4, &a), (1, 4, &b), (1, 3, &c), (2, 3, &d)],
            &[3, 2],
        );
        let s = &a + &b + &c + &d;
        let expected = [
            [
                &a * &b + &a * &c + &a * &d,
                -(&a * &b) - &a * &c,
                &a * &c + &a * &d,
            ],
            [
                -(&a * &b) - &a * &c,
                &a * &b + &a * &c + &b * &d + &c * &d,
                -(&a * &c) + &b * &d,
            ],
            [
                &a * &c + &a * &d,
                -(&a * &c) + &b * &d,
                &a * &c + &b * &c + &a * &d + &b * &d,
            ],
        ];
        let l = c2l(
            &electrical_response(&w).map_err(|e| e.to_string())?,
            &[3, 2],
        )
        .map_err(|e| e.to_string())?;
        for i in 0..3 {
            for j in 0..3 {
                if l[(i, j)] != &expected[i][j] / &s {
                    return Err(format!(
                        "a,b,c,d = {a},{b},{c},{d}: L[{i}][{j}] = {}",
                        l[(i, j)]
                    ));
                }
            }
        }
    }
    Ok("40 tuples".into())
}

fn crossed_square_entry() -> Check {
    let mut r = rng(2);
    for _ in 0..40 {
        let [a, b, c, d] = tuple(&mut r);
        let sq = net(
            4,
            &[(0, 2, &a), (1, 3, &b), (1, 2, &c), (0, 3, &d)],
            &[2, 2],
        );
        let l = superport_response(&sq).map_err(|e| e.to_string())?;
        let s = &a + &b + &c + &d;
        let closed = (&c * &d - &a * &b) / &s;
        if l[(0, 1)] != closed {
            return Err(format!("a,b,c,d = {a},{b},{c},{d}: L_1^3 = {}", l[(0, 1)]));
        }
        let size = sq.n() - sq.m() + sq.p();
        let mut numer = Rational::zero();
        let mut denom = Rational::zero();
        ForestEnumerator::new(&sq)
            .for_each(|f| {
                if is_valid(&sq, f) {
                    denom += f.weight(&sq);
                }
                if f.edges().len() == size
                    && is_relatively_valid(&sq, f, 0)
                    && is_relatively_valid(&sq, f, 2)
                {
                    numer += f.weight(&sq) * int(forest_sign(&sq, f, 0, 2) as i64);
                }
            })
            .map_err(|e| e.to_string())?;
        if numer != &c * &d - &a * &b || denom != s {
            return Err(format!(
                "a,b,c,d = {a},{b},{c},{d}: forests give {numer} / {denom}"
            ));
        }
    }
    Ok("40 tuples, numerator cd - ab by enumeration".into())
}

fn port_square_det() -> Check {
    let mut r = rng(3);
    for _ in 0..40 {
        let [a, b, c, d] = tuple(&mut r);
        let sq = net(
            4,
            &[(0, 2, &a), (0, 1, &b), (1, 3, &c), (2, 3, &d)],
            &[2, 2],
        );
        let closed = (&a * &b * &c + &a * &b * &d + &a * &c * &d + &b * &c * &d) / (&a + &c);
        let l = c2l(
            &electrical_response(&sq).map_err(|e| e.to_string())?,
            &[2, 2],
        )
        .map_err(|e| e.to_string())?;
        let det = l.det().map_err(|e| e.to_string())?;
        let v =
            Verifier::new(&sq, DEFAULT_CAP, Execution::Sequential).map_err(|e| e.to_string())?;
        let forests = v.tree_sum() / v.valid_sum();
        if det != closed || forests != closed {
            return Err(format!(
                "a,b,c,d = {a},{b},{c},{d}: {det} / {forests} vs {closed}"
            ));
        }
        all_passed(&[v.det_l().map_err(|e| e.to_string())?])?;
    }
    Ok("40 tuples, matrix and forest routes".into())
}

fn kirchhoff() -> Check {
    let (a, b, c, d) = (int(2), int(3), int(5), int(7));
    let square = net(4, &[(0, 2, &a), (0, 1, &b), (1, 3, &c), (2, 3, &d)], &[4]);
    let mut reports = vec![Verifier::new(&square, DEFAULT_CAP, Execution::Parallel)
        .and_then(|v| v.kirchhoff())
        .map_err(|e| e.to_string())?];
    for n in networks(4, 100, true) {
        let v = Verifier::new(&n, DEFAULT_CAP, Execution::Sequential).map_err(|e| e.to_string())?;
        reports.push(v.kirchhoff().map_err(|e| e.to_string())?);
    }
    all_passed(&reports).map(|_| "square + 100 random networks".into())
}

fn kenyon_wilson() -> Check {
    let mut r = rng(5);
    let mut with_factor = Vec::new();
    let mut without_failures = 0;
    for n in networks(5, 100, false) {
        let n = n.unify_superports();
        let v = Verifier::new(&n, DEFAULT_CAP, Execution::Sequential).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let (x, y, z) = random_xyz(&mut r, n.m(), 2);
            with_factor.push(v.kw_minor(&x, &y, &z, true).map_err(|e| e.to_string())?);
            if !v
                .kw_minor(&x, &y, &z, false)
                .map_err(|e| e.to_string())?
                .passed()
            {
                without_failures += 1;
            }
        }
    }
    all_passed(&with_factor)?;
    if without_failures == 0 {
        return Err("dropping (-1)^|X| never fails".into());
    }
    Ok(format!(
        "{} minors; {without_failures} fail without the sign factor",
        with_factor.len()
    ))
}

fn det_l_and_cancellation() -> (Check, Check) {
    let mut det = Vec::new();
    let (mut nonvalid, mut valid, mut involutions) = (0, 0, 0);
    let mut cancel: Check = Ok(String::new());
    for n in networks(6, 200, true) {
        let v = match Verifier::new(&n, DEFAULT_CAP, Execution::Sequential) {
            Ok(v) => v,
            Err(e) => return (Err(e.to_string()), Err(e.to_string())),
        };
        match v.det_l() {
            Ok(r) => det.push(r),
            Err(e) => return (Err(e.to_string()), Err(e.to_string())),
        }
        match v.cancellation() {
            Ok(stats) => {
                nonvalid += stats.nonvalid_forests;
                valid += stats.valid_forests;
                involutions += stats.involution_checks;
                if let (Some(f), Ok(_)) = (stats.failures.first(), &cancel) {
                    cancel = Err(format!("{f} on {}", n.to_json().replace('\n', "")));
                }
                if stats.signed_total != *v.valid_sum() && cancel.is_ok() {
                    cancel = Err(format!(
                        "signed total {} != {}",
                        stats.signed_total,
                        v.valid_sum()
                    ));
                }
            }
            Err(e) => cancel = Err(e.to_string()),
        }
    }
    let det = all_passed(&det).map(|_| "200 random networks".into());
    let cancel = cancel.map(|_| {
        format!(
            "{nonvalid} non-valid forests, {involutions} involution checks, {valid} valid forests"
        )
    });
    (det, cancel)
}

fn cayley_counts() -> Check {
    let mut counts = Vec::new();
    for m in 1..=6 {
        let report = cayley(m, DEFAULT_CAP, Execution::Parallel).map_err(|e| e.to_string())?;
        all_passed(std::slice::from_ref(&report.report))?;
        counts.push(report.counts[0]);
    }
    if counts != [1, 1, 3, 16, 125, 1296] {
        return Err(format!("{counts:?}"));
    }
    let mut shapes = 0;
    for n in 1..=7 {
        for sizes in compositions(n, 3) {
            let mut variants = vec![sizes.iter().map(|&s| TreePart::path(s)).collect::<Vec<_>>()];
            if sizes.iter().any(|&s| s >= 4) {
                variants.push(sizes.iter().map(|&s| star(s)).collect());
            }
            for parts in variants {
                let report = generalized_cayley(&parts, 21, Execution::Parallel)
                    .map_err(|e| e.to_string())?;
                all_passed(std::slice::from_ref(&report.report))
                    .map_err(|e| format!("sizes {sizes:?}: {e}"))?;
                shapes += 1;
            }
        }
    }
    Ok(format!("{counts:?}; {shapes} generalized shapes"))
}

fn star(size: usize) -> TreePart {
    TreePart {
        size,
        edges: (1..size).map(|k| (0, k)).collect(),
    }
}

/// Non-increasing part sizes summing to `n`, at most `max_parts` of them.
fn compositions(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cap: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if left == 0 {
            return;
        }
        for s in (1..=rest.min(cap)).rev() {
            cur.push(s);
            go(rest - s, s, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, max_parts, &mut Vec::new(), &mut out);
    out
}

fn circuits() -> Check {
    let mut r = rng(9);
    let mut reports = Vec::new();
    for n in networks(9, 100, true) {
        let circuit = random_circuit(&mut r, &n, 9);
        let v = Verifier::new(&n, DEFAULT_CAP, Execution::Sequential).map_err(|e| e.to_string())?;
        reports.push(v.solution(&circuit).map_err(|e| e.to_string())?);
    }
    all_passed(&reports).map(|_| "100 random circuits".into())
}

fn fixture_networks() -> Vec<SuperportNetwork> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    [
        "w-network.json",
        "fig6-square.json",
        "fig7-square.json",
        "fig1-twoport.json",
        "k4.json",
    ]
    .iter()
    .map(|f| {
        SuperportNetwork::from_json(&std::fs::read_to_string(dir.join(f)).unwrap(), false)
            .unwrap()
            .0
    })
    .collect()
}

fn routes() -> Check {
    let mut checked = 0;
    for n in fixture_networks() {
        let direct = response_from_k(&n).map_err(|e| e.to_string())?;
        let via_c = superport_response(&n).map_err(|e| e.to_string())?;
        if direct != via_c || !direct.is_symmetric() {
            return Err(format!("fixture {}", n.to_json().replace('\n', "")));
        }
        checked += 1;
    }
    let opts = CampaignOptions {
        seed: 10,
        count: 100,
        theorems: vec![Theorem::Routes, Theorem::SingletonDrop],
        ..CampaignOptions::default()
    };
    let outcomes = run_campaign(&opts).map_err(|e| e.to_string())?;
    let reports: Vec<Report> = outcomes.into_iter().flat_map(|o| o.reports).collect();
    all_passed(&reports)?;
    let drops = reports
        .iter()
        .filter(|r| r.theorem == "singleton-drop")
        .count();

    // Splitting off singleton superports on purpose, so the drop is exercised.
    let mut forced = 0;
    let mut r = rng(10);
    while forced < 30 {
        let n = random_network(&mut r, &shape(true));
        let mut sizes = n.superport_sizes();
        let Some(k) = sizes.iter().position(|&s| s >= 3) else {
            continue;
        };
        sizes[k] -= 1;
        sizes.insert(k + 1, 1);
        let n = n.with_superport_sizes(&sizes).map_err(|e| e.to_string())?;
        let v = Verifier::new(&n, DEFAULT_CAP, Execution::Sequential).map_err(|e| e.to_string())?;
        let report = v
            .singleton_drop()
            .map_err(|e| e.to_string())?
            .ok_or("nothing to drop")?;
        all_passed(&[report])?;
        forced += 1;
    }
    Ok(format!(
        "{checked} fixtures, 100 campaign networks ({drops} drops), {forced} forced drops"
    ))
}

fn box_h_check() -> Check {
    let unit = box_h(&int(1), &int(1), &int(1), &int(1)).map_err(|e| e.to_string())?;
    if unit.h_values.iter().any(|v| *v != ratio(1, 4)) || !unit.report.passed() {
        return Err(format!(
            "unit box: {:?}",
            unit.h_values
                .iter()
                .map(format_rational)
                .collect::<Vec<_>>()
        ));
    }
    let mut r = rng(11);
    for _ in 0..40 {
        let [a, b, c, d] = tuple(&mut r);
        let result = box_h(&a, &b, &c, &d).map_err(|e| e.to_string())?;
        let s = &a + &b + &c + &d;
        let formulas = [
            &a * &b / &s,
            &b * &c / &s,
            &a * &d / &s,
            &c * &d / &s,
            &b * &d / &s,
        ];
        if result.h_values != formulas || !result.report.passed() {
            return Err(result.report.to_string());
        }
        if !result.box_response.is_symmetric() || result.box_response.rows() != 2 {
            return Err(format!("box response {}", result.box_response));
        }
    }
    Ok("unit box + 40 tuples".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (det, cancel) = det_l_and_cancellation();
    let results: Vec<(&str, Check)> = vec![
        ("W-network response closed form", w_network()),
        ("square entry L_1^3 and signed forests", crossed_square_entry()),
        ("square determinant by two routes", port_square_det()),
        ("Kirchhoff theorem", kirchhoff()),
        ("Kenyon-Wilson minors and sign factor", kenyon_wilson()),
        ("determinant of L", det),
        ("cancellation involution", cancel),
        ("Cayley and generalized Cayley counts", cayley_counts()),
        ("solver consistency on random circuits", circuits()),
        ("route equivalence, symmetry, singleton drop", routes()),
        ("box-H response equality", box_h_check()),
    ];
    let mut failed = 0;
    for (k, (name, result)) in results.iter().enumerate() {
        match result {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
