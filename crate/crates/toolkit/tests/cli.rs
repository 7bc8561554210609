use std::path::Path;

use proptest::prelude::*;
use serde_json::Value;
use stealth_core::rng::{seeded, standard_normal};
use stealth_core::{Activation, DenseLayer, InputBox, Network};
use stealth_toolkit::cli::run_with;
use stealth_toolkit::exit;
use stealth_toolkit::formats::{load_model, read_json, save_model, ModelFile};
use stealth_toolkit::hash::hash_model_path;
use stealth_toolkit::manifest::RunManifest;

fn run(args: &[&str]) -> (i32, String) {
    let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    let code = run_with(&argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_fixture(dir: &Path) {
    let (code, _) = run(&[
        "gen",
        "--out-dir",
        p(dir),
        "--input-dim",
        "40",
        "--hidden",
        "30,12",
        "--classes",
        "4",
        "--samples",
        "220",
        "--holdout",
        "5",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
}

fn small_attack(fx: &Path, out: &Path) -> i32 {
    run(&[
        "attack",
        "--model",
        p(&fx.join("model.json")),
        "--target",
        p(&fx.join("heldout.json")),
        "--sample",
        p(&fx.join("validation.json")),
        "--max-iters",
        "1500",
        "--step0",
        "0.5",
        "--M",
        "215",
        "--seed",
        "9",
        "--out-dir",
        p(out),
    ])
    .0
}

#[test]
fn help_and_version_exit_zero_and_bad_flags_exit_one() {
    assert_eq!(run(&["--help"]).0, exit::OK);
    assert_eq!(run(&["--version"]).0, exit::OK);
    assert_eq!(run(&["bounds"]).0, exit::USAGE);
    assert_eq!(run(&["bounds", "--n", "10", "--gamma", "x"]).0, exit::USAGE);
    assert_eq!(run(&["frobnicate"]).0, exit::USAGE);
}

#[test]
fn bounds_table_and_json() {
    let (code, text) = run(&["bounds", "--M", "10", "--n", "112", "--gamma", "0.9", "--delta", "0.3333333", "--alpha", "0.179"]);
    assert_eq!(code, 0);
    assert!(text.contains("p1_integral"));
    assert!(text.contains("0.2343"), "{text}");

    let (code, text) = run(&["bounds", "--M", "0", "--n", "50", "--alpha", "0.1", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    for k in ["bound_integral", "bound_closed", "bound_alpha0"] {
        assert_eq!(v[k].as_f64().unwrap(), 1.0, "{k}");
    }
}

#[test]
fn bounds_hypothesis_violations_exit_two() {
    assert_eq!(run(&["bounds", "--n", "50", "--gamma", "0.5", "--delta", "0.2", "--alpha", "0.5"]).0, exit::HYPOTHESIS);
    let args = ["bounds", "--n", "50", "--gamma", "0.9", "--delta", "0.9", "--C", "1", "--eps-collapse", "0.1"];
    assert_eq!(run(&args).0, exit::HYPOTHESIS);
    assert_eq!(run(&["bounds", "--n", "1"]).0, exit::USAGE);
}

#[test]
fn bound_sweep_is_monotone_in_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let (code, _) = run(&["bounds", "--n", "80", "--M", "3", "--sweep", "alpha=0:0.15:16", "--json", "--csv", p(&csv)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 17);
    let col = rows[0].split(',').position(|c| c == "bound_integral").unwrap();
    let values: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
}

#[test]
fn missing_model_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["attack", "--model", "/nonexistent/model.json", "--radius", "1", "--out-dir", p(dir.path())]).0;
    assert_eq!(code, exit::USAGE);
    assert_eq!(run(&["hash", "/nonexistent/model.json"]).0, exit::USAGE);
}

#[test]
fn attack_plant_verify_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    small_fixture(&fx);
    let atk = dir.path().join("atk");
    assert_eq!(small_attack(&fx, &atk), exit::OK);
    let summary: Value = read_json(&atk.join("attack.json")).unwrap();
    assert!(summary["alpha"].as_f64().unwrap() < 1.0);

    let model = fx.join("model.json");
    let before = std::fs::read(&model).unwrap();
    for scenario in ["1", "2", "3"] {
        let out = dir.path().join(format!("p{scenario}"));
        let (code, _) = run(&[
            "plant",
            "--model",
            p(&model),
            "--neuron",
            p(&atk.join("neuron.json")),
            "--scenario",
            scenario,
            "--validation",
            p(&fx.join("validation.json")),
            "--out-dir",
            p(&out),
        ]);
        assert_eq!(code, 0, "scenario {scenario}");
        let prov: Value = read_json(&out.join("provenance.json")).unwrap();
        assert_eq!(prov["scenario"].as_u64().unwrap().to_string(), scenario);
    }
    assert_eq!(std::fs::read(&model).unwrap(), before, "inputs are never modified");

    let p3 = load_model(&dir.path().join("p3/planted.json")).unwrap();
    assert_eq!(p3.param_count(), load_model(&model).unwrap().param_count());

    let verify = |planted: &Path| {
        run(&[
            "verify",
            "--original",
            p(&model),
            "--planted",
            p(planted),
            "--validation",
            p(&fx.join("validation.json")),
            "--trigger",
            p(&atk.join("trigger.json")),
            "--neuron",
            p(&atk.join("neuron.json")),
        ])
        .0
    };
    assert_eq!(verify(&dir.path().join("p1/planted.json")), exit::OK);
    assert_eq!(verify(&dir.path().join("p2/planted.json")), exit::OK);
    // the unplanted model never reaches the trigger response
    assert_eq!(verify(&model), exit::VERIFICATION);

    let (code, text) = run(&["replay", p(&atk.join("manifest.json")), "--out-dir", p(&dir.path().join("again"))]);
    assert_eq!(code, exit::OK, "{text}");
    let m: RunManifest = read_json(&atk.join("manifest.json")).unwrap();
    assert_eq!(m.command, "attack");
    assert_eq!(m.seeds["seed"], 9);
    assert!(m.outputs.contains_key("trigger.json") && m.outputs.contains_key("neuron.json"));
}

#[test]
fn replay_detects_tampered_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    small_fixture(&fx);
    let manifest = fx.join("manifest.json");
    let mut m: RunManifest = read_json(&manifest).unwrap();
    m.outputs.insert("model.json".into(), "0".repeat(64));
    stealth_toolkit::formats::write_json(&manifest, &m).unwrap();
    let (code, _) = run(&["replay", p(&manifest), "--out-dir", p(&dir.path().join("again"))]);
    assert_eq!(code, exit::VERIFICATION);
}

#[test]
fn infeasible_search_exits_three_and_keeps_the_trigger() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    small_fixture(&fx);
    let out = dir.path().join("atk");
    let code = run(&[
        "attack",
        "--model",
        p(&fx.join("model.json")),
        "--target",
        p(&fx.join("heldout.json")),
        "--target-index",
        "0",
        "--radius",
        "1e-6",
        "--max-iters",
        "3",
        "--out-dir",
        p(&out),
    ])
    .0;
    assert_eq!(code, exit::ALGORITHM);
    assert!(out.join("trigger.json").exists());
    assert!(!out.join("neuron.json").exists());
}

#[test]
fn scenario2_rejects_unsupported_hosts() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    small_fixture(&fx);
    let atk = dir.path().join("atk");
    assert_eq!(small_attack(&fx, &atk), exit::OK);
    // cutting at the last hidden layer leaves no host layer for the relay
    let (code, _) = run(&[
        "plant",
        "--model",
        p(&fx.join("model.json")),
        "--neuron",
        p(&atk.join("neuron.json")),
        "--scenario",
        "2",
        "--cut",
        "1",
        "--out-dir",
        p(&dir.path().join("p")),
    ]);
    assert_ne!(code, exit::OK);
}

#[test]
fn rank_and_mc_commands() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    small_fixture(&fx);
    let (code, text) = run(&["rank", "--model", p(&fx.join("model.json")), "--layer", "0", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    let norms: Vec<f64> = v["norms"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(norms.len(), 30);
    assert!(norms.windows(2).all(|w| w[0] <= w[1]));

    let (code, text) = run(&["mc", "--n", "20", "--M", "0", "--trials", "1e4", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["success_frequency"].as_f64().unwrap(), 1.0);

    let latents = dir.path().join("zero.json");
    std::fs::write(&latents, r#"{"dim": 3, "vectors": [[0,0,0],[0,0,0]]}"#).unwrap();
    let (code, text) = run(&[
        "mc", "--n", "3", "--latent-model", "fixed-list", "--latents", p(&latents), "--trials", "2000", "--json",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["failures"].as_u64().unwrap(), 0);
    assert_eq!(v["M"].as_u64().unwrap(), 2);
    assert_eq!(run(&["mc", "--n", "3", "--latent-model", "fixed-list"]).0, exit::USAGE);
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    small_fixture(&a);
    small_fixture(&b);
    for f in ["model.json", "validation.json", "heldout.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn hash_ignores_key_order_and_whitespace() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(
        &a,
        r#"{"input_dim":1,"input_box":{"lower":[0],"upper":[1]},"layers":[{"in_dim":1,"out_dim":1,"activation":"relu","weights":[[0.5]],"biases":[0]}],"metadata":{}}"#,
    )
    .unwrap();
    std::fs::write(
        &b,
        "{ \"metadata\": {},\n \"layers\": [ {\"biases\": [0.0], \"weights\": [[5e-1]], \"activation\": \"relu\", \"out_dim\": 1, \"in_dim\": 1} ],\n \"input_box\": {\"upper\": [1.0], \"lower\": [0.0]}, \"input_dim\": 1 }",
    )
    .unwrap();
    let (code, text) = run(&["hash", p(&a)]);
    assert_eq!(code, 0);
    assert_eq!(text.trim(), hash_model_path(&b).unwrap());
    assert_eq!(text.trim().len(), 64);
}

#[test]
fn shape_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"input_dim":3,"input_box":{"lower":[0,0,0],"upper":[1,1,1]},"layers":[
            {"in_dim":3,"out_dim":4,"activation":"relu","weights":[[0,0,0],[0,0,0],[0,0,0],[0,0,0]],"biases":[0,0,0,0]},
            {"in_dim":5,"out_dim":2,"activation":"softmax","weights":[[0,0,0,0,0],[0,0,0,0,0]],"biases":[0,0]}],"metadata":{}}"#,
    )
    .unwrap();
    assert_eq!(run(&["hash", p(&bad)]).0, exit::USAGE);
}

fn random_model(seed: u64, dims: &[usize]) -> Network {
    let mut rng = seeded(seed);
    let layers: Vec<DenseLayer> = dims
        .windows(2)
        .enumerate()
        .map(|(k, d)| {
            let act = if k + 2 == dims.len() { Activation::Softmax } else { Activation::Sigmoid };
            let w = (0..d[0] * d[1]).map(|_| standard_normal(&mut rng) * 1e3f64.powf(standard_normal(&mut rng))).collect();
            let b = (0..d[1]).map(|_| standard_normal(&mut rng)).collect();
            DenseLayer::new(d[0], d[1], w, b, act).unwrap()
        })
        .collect();
    let mut meta = std::collections::BTreeMap::new();
    meta.insert("name".to_string(), format!("model \"{seed}\""));
    Network::new(dims[0], InputBox::uniform(dims[0], -1.0, 1.0).unwrap(), layers, meta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, rng_seed: proptest::test_runner::RngSeed::Fixed(5), ..ProptestConfig::default() })]

    #[test]
    fn save_load_is_bit_identical(seed in any::<u64>(), a in 1usize..6, b in 1usize..6, c in 1usize..4) {
        let dir = tempfile::tempdir().unwrap();
        let net = random_model(seed, &[a, b, c]);
        let path = dir.path().join("m.json");
        save_model(&path, &net).unwrap();
        let back = load_model(&path).unwrap();
        for (x, y) in net.layers().iter().zip(back.layers()) {
            prop_assert_eq!(
                x.weights().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                y.weights().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(x.biases(), y.biases());
        }
        let again = dir.path().join("m2.json");
        save_model(&again, &back).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
        let file: ModelFile = read_json(&path).unwrap();
        prop_assert_eq!(file, ModelFile::from_network(&net));
    }

    #[test]
    fn weight_bit_flip_changes_the_digest(seed in any::<u64>(), idx in 0usize..12) {
        let dir = tempfile::tempdir().unwrap();
        let net = random_model(seed, &[3, 4, 2]);
        let mut file = ModelFile::from_network(&net);
        let path = dir.path().join("a.json");
        stealth_toolkit::formats::write_json(&path, &file).unwrap();
        let w = &mut file.layers[0].weights[idx / 3][idx % 3];
        *w = f64::from_bits(w.to_bits() ^ 1);
        let flipped = dir.path().join("b.json");
        stealth_toolkit::formats::write_json(&flipped, &file).unwrap();
        prop_assert_ne!(hash_model_path(&path).unwrap(), hash_model_path(&flipped).unwrap());
    }
}
