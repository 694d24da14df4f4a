//! End-to-end acceptance run over the bundled corpus. Each criterion prints
//! one PASS/FAIL line; the test fails if any criterion does.

use std::collections::{BTreeSet, HashMap};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use biinterp_core::corpus::{bundled_corpus, InstanceSpec};
use biinterp_core::extension::{extension_data, verify_extension_identities, ExtensionData};
use biinterp_core::folog::{
    axiomatize_with_tuple, check_axiomatization, default_budget, parse_sentence, random_sentence, EvalError, Evaluator,
    ParamEnv, SentenceShape,
};
use biinterp_core::gamma::{build_codec, build_codec_with_mode, choose_xi, encode_raw, GammaCodec, Mode};
use biinterp_core::group::{subgroup_closure, GroupTable, Subgroup};
use biinterp_core::interp::{condition_a_from_b, interpret_g_in_h, kappa_var, translate, FIXED_SENTENCES};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Instance {
    name: String,
    g: Arc<GroupTable>,
    sub: Subgroup,
    ext: Arc<ExtensionData>,
    codec: GammaCodec,
}

fn load(spec: &InstanceSpec) -> Instance {
    let g = Arc::new(spec.group_table().unwrap());
    let kappa = spec.kappa_formula().unwrap().resolve_params(&spec.env()).unwrap();
    let var = kappa_var(&kappa).unwrap();
    let set = Evaluator::new(&g, &ParamEnv::new()).definable_set(&kappa, &[var]).unwrap();
    let sub = Subgroup::from_members(g.clone(), set.into_iter().map(|t| t[0])).unwrap();
    let ext = Arc::new(extension_data(&sub).unwrap());
    let codec = build_codec(ext.clone()).unwrap();
    Instance { name: spec.name.clone(), g, sub, ext, codec }
}

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    if took < limit {
        Ok(format!("{detail}, {:.2?}", took))
    } else {
        Err(format!("{detail}, but took {:.2?} (limit {:?})", took, limit))
    }
}

fn extension_identities(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for inst in corpus {
        let r = verify_extension_identities(&inst.ext);
        if let Some(f) = r.first_failure() {
            return Err(format!("{}: {} failed", inst.name, f.name));
        }
        checks += r.steps.len();
    }
    within(start, Duration::from_secs(1), format!("{checks} identity groups on {} instances", corpus.len()))
}

fn gamma_isomorphism(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    for inst in corpus {
        let g = &inst.g;
        let c = &inst.codec;
        let codes: BTreeSet<&[usize]> = g.elements().map(|a| c.encode(a)).collect();
        if codes.len() != g.order() {
            return Err(format!("{}: encoding is not injective", inst.name));
        }
        for a in g.elements() {
            for b in g.elements() {
                let want = c.encode(g.mul(a, b));
                let fast = c.gamma_op(c.encode(a), c.encode(b)).map_err(|e| e.to_string())?;
                let slow = c.gamma_op_generic(c.encode(a), c.encode(b)).map_err(|e| e.to_string())?;
                if fast != want || slow != want {
                    return Err(format!("{}: product of {a} and {b}", inst.name));
                }
                pairs += 1;
            }
        }
    }
    within(start, Duration::from_secs(5), format!("{pairs} pairs, both product paths"))
}

fn index_two_collision(corpus: &[Instance]) -> Outcome {
    let mut seen = Vec::new();
    for inst in corpus.iter().filter(|i| i.ext.m() == 2) {
        let xi = choose_xi(&inst.sub).unwrap();
        let xi_local = inst.sub.local_id(xi).unwrap();
        let raw = encode_raw(&inst.ext, Mode::Standard, xi_local);
        let mut by_code: HashMap<&[usize], Vec<usize>> = HashMap::new();
        for (g, code) in raw.iter().enumerate() {
            by_code.entry(code).or_default().push(g);
        }
        let mut clashes: Vec<Vec<usize>> = by_code.into_values().filter(|v| v.len() > 1).collect();
        clashes.sort();
        // xi against t_2, and mirrored, the identity against xi * t_2
        let t2 = inst.ext.t(1);
        let mut expected = vec![vec![xi.min(t2), xi.max(t2)], vec![0, inst.g.mul(xi, t2)]];
        expected.sort();
        if clashes != expected {
            return Err(format!("{}: standard clashes {clashes:?}, expected {expected:?}", inst.name));
        }
        if build_codec_with_mode(inst.ext.clone(), Mode::Standard).is_ok() {
            return Err(format!("{}: standard mode accepted", inst.name));
        }
        let star = build_codec_with_mode(inst.ext.clone(), Mode::Star).map_err(|e| e.to_string())?;
        let codes: BTreeSet<&[usize]> = inst.g.elements().map(|a| star.encode(a)).collect();
        if codes.len() != inst.g.order() {
            return Err(format!("{}: star encoding is not injective", inst.name));
        }
        seen.push(inst.name.as_str());
    }
    for need in ["C4/C2", "C6/C3", "S3/A3", "S4/A4"] {
        if !seen.contains(&need) {
            return Err(format!("{need} was not checked"));
        }
    }
    Ok(format!("index-2 instances {}", seen.join(", ")))
}

fn formula_exactness(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut tuples = 0;
    for inst in corpus {
        let interp = interpret_g_in_h(&inst.codec, default_budget()).map_err(|e| format!("{}: {e}", inst.name))?;
        let g = &inst.g;
        let enc = |a: usize| inst.codec.encode(a).to_vec();
        let domain: BTreeSet<Vec<usize>> = g.elements().map(enc).collect();
        let graph: BTreeSet<Vec<usize>> = g
            .elements()
            .flat_map(|a| g.elements().map(move |b| (a, b)))
            .map(|(a, b)| [enc(a), enc(b), enc(g.mul(a, b))].concat())
            .collect();
        let mut ev = Evaluator::new(interp.target(), &ParamEnv::new());
        let got_domain = ev.definable_set(interp.domain_formula(), &interp.domain_vars()).map_err(|e| e.to_string())?;
        let got_graph = ev.definable_set(interp.mult_formula(), &interp.mult_vars()).map_err(|e| e.to_string())?;
        if got_domain != domain {
            return Err(format!("{}: domain formula defines the wrong set", inst.name));
        }
        if got_graph != graph {
            return Err(format!("{}: product formula defines the wrong graph", inst.name));
        }
        tuples += domain.len() + graph.len();
    }
    within(start, Duration::from_secs(60), format!("{tuples} tuples matched, all exhaustive"))
}

fn translation_soundness(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let (mut total, mut skipped) = (0usize, 0usize);
    for (n, inst) in corpus.iter().enumerate() {
        let interp = interpret_g_in_h(&inst.codec, default_budget()).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
        let mut sentences: Vec<_> = FIXED_SENTENCES.iter().map(|s| parse_sentence(s).unwrap()).collect();
        sentences.extend((0..100).map(|_| random_sentence(&mut rng, SentenceShape::default())));
        let mut src = Evaluator::new(&inst.g, &ParamEnv::new());
        let mut tgt = Evaluator::new(interp.target(), &ParamEnv::new());
        for phi in &sentences {
            total += 1;
            let psi = translate(phi, &interp, &ParamEnv::new()).map_err(|e| e.to_string())?.psi;
            let outcome = src.eval_sentence(phi).and_then(|a| tgt.eval_sentence(&psi).map(|b| (a, b)));
            match outcome {
                Ok((a, b)) if a == b => {}
                Ok((a, b)) => return Err(format!("{}: `{phi}` gives {a} in G but {b} in H", inst.name)),
                Err(EvalError::ComplexityCap { .. }) => skipped += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    if skipped * 5 >= total {
        return Err(format!("{skipped} of {total} sentences skipped"));
    }
    within(start, Duration::from_secs(120), format!("{total} sentences, {skipped} skipped"))
}

fn conjugation_recovery(corpus: &[Instance]) -> Outcome {
    let mut count = 0;
    for inst in corpus {
        let interp = interpret_g_in_h(&inst.codec, default_budget()).map_err(|e| e.to_string())?;
        let g = &inst.g;
        for &t in inst.ext.transversal() {
            let r = condition_a_from_b(&interp, &inst.codec, t, default_budget())
                .map_err(|e| format!("{} t={t}: {e}", inst.name))?;
            let want: BTreeSet<(usize, usize)> = inst
                .sub
                .members()
                .iter()
                .map(|&a| {
                    let b = g.mul(g.mul(g.inv(t), a), t);
                    (inst.sub.local_id(a).unwrap(), inst.sub.local_id(b).unwrap())
                })
                .collect();
            if r.graph != want {
                return Err(format!("{} t={t}: wrong conjugation graph", inst.name));
            }
            count += 1;
        }
    }
    Ok(format!("{count} transversal elements"))
}

/// Isomorphism `a -> b` sending `ta` to `tb`, found by backtracking over all
/// partial bijections.
fn iso_with_tuple(a: &GroupTable, ta: &[usize], b: &GroupTable, tb: &[usize]) -> Option<Vec<usize>> {
    fn consistent(a: &GroupTable, b: &GroupTable, f: &[Option<usize>]) -> bool {
        for x in a.elements() {
            let Some(fx) = f[x] else { continue };
            for y in a.elements() {
                let Some(fy) = f[y] else { continue };
                if let Some(fxy) = f[a.mul(x, y)] {
                    if b.mul(fx, fy) != fxy {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn extend(a: &GroupTable, b: &GroupTable, f: &mut Vec<Option<usize>>, used: &mut Vec<bool>, x: usize) -> bool {
        if x == a.order() {
            return true;
        }
        if f[x].is_some() {
            return extend(a, b, f, used, x + 1);
        }
        for y in b.elements() {
            if used[y] {
                continue;
            }
            f[x] = Some(y);
            used[y] = true;
            if consistent(a, b, f) && extend(a, b, f, used, x + 1) {
                return true;
            }
            f[x] = None;
            used[y] = false;
        }
        false
    }
    if a.order() != b.order() || ta.len() != tb.len() {
        return None;
    }
    let mut f = vec![None; a.order()];
    let mut used = vec![false; b.order()];
    for (&x, &y) in ta.iter().zip(tb) {
        match f[x] {
            Some(v) if v != y => return None,
            Some(_) => {}
            None if used[y] => return None,
            None => {
                f[x] = Some(y);
                used[y] = true;
            }
        }
    }
    if !consistent(a, b, &f) || !extend(a, b, &mut f, &mut used, 0) {
        return None;
    }
    Some(f.into_iter().map(Option::unwrap).collect())
}

fn tuples(order: usize, arity: usize) -> Vec<Vec<usize>> {
    (0..arity).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter().flat_map(|t| (0..order).map(move |a| [t.clone(), vec![a]].concat())).collect()
    })
}

fn axiomatization(corpus: &[Instance]) -> Outcome {
    let mut groups: Vec<(String, Arc<GroupTable>)> = Vec::new();
    for inst in corpus {
        for (label, table) in [
            (inst.name.split('/').next().unwrap().to_string(), inst.g.clone()),
            (inst.name.split('/').nth(1).unwrap().to_string(), inst.ext.h_table().clone()),
        ] {
            if table.order() <= 12 && !groups.iter().any(|(_, t)| t.rows() == table.rows()) {
                groups.push((label, table));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut certs, mut checks, mut positives) = (0, 0, 0);
    for (label, g) in &groups {
        let mut gens: Vec<Vec<usize>> = (1..=2)
            .flat_map(|k| tuples(g.order(), k))
            .filter(|t| subgroup_closure(g, t).order() == g.order())
            .collect();
        gens.shuffle(&mut rng);
        gens.truncate(20);
        for tuple in &gens {
            let cert = axiomatize_with_tuple(g.clone(), tuple).map_err(|e| format!("{label} {tuple:?}: {e}"))?;
            certs += 1;
            for (other, h) in groups.iter().filter(|(_, h)| h.order() == g.order()) {
                for t2 in tuples(h.order(), tuple.len()) {
                    let got = check_axiomatization(&cert, h, &t2).map_err(|e| e.to_string())?;
                    let want = iso_with_tuple(g, tuple, h, &t2);
                    if got.holds != want.is_some() {
                        return Err(format!("{label} {tuple:?} against {other} {t2:?}: got {}", got.holds));
                    }
                    checks += 1;
                    positives += got.holds as usize;
                }
            }
        }
    }
    let names: Vec<&str> = groups.iter().map(|(l, _)| l.as_str()).collect();
    Ok(format!("{certs} certificates over {}, {checks} checks, {positives} isomorphic", names.join(" ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("run{run}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_biinterp"))
            .args(["corpus", "--seed", "11", "--suite-size", "10", "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("corpus run exited with {}", out.status));
        }
        outputs.push((out.stdout, std::fs::read(&path).map_err(|e| e.to_string())?));
    }
    if outputs[0] != outputs[1] {
        return Err("reports differ between runs".into());
    }
    Ok(format!("{} report bytes identical", outputs[0].1.len()))
}

#[test]
fn acceptance() {
    let corpus: Vec<Instance> = bundled_corpus().iter().map(load).collect();
    assert_eq!(corpus.len(), 8);
    let criteria: Vec<Criterion> = vec![
        ("extension identities", Box::new(|| extension_identities(&corpus))),
        ("encoding isomorphism", Box::new(|| gamma_isomorphism(&corpus))),
        ("index-2 collision", Box::new(|| index_two_collision(&corpus))),
        ("formula exactness", Box::new(|| formula_exactness(&corpus))),
        ("translation soundness", Box::new(|| translation_soundness(&corpus))),
        ("conjugation recovery", Box::new(|| conjugation_recovery(&corpus))),
        ("axiomatization certificates", Box::new(|| axiomatization(&corpus))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", n + 1),
            Err(detail) => {
                println!("criterion {} {name}: FAIL ({detail})", n + 1);
                failed.push(n + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
