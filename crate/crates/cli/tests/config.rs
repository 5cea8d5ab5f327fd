use rug::{Integer, Rational};
use satmodel::model::Denominator;
use satmodel_cli::config::{CandidateSpec, Command, PrecisionSpec, Task};
use satmodel_cli::parse_config;

fn errors(text: &str) -> Vec<String> {
    parse_config(text).expect_err("config should be rejected").messages()
}

#[test]
fn minimal_render_config_with_two_fractions() {
    let cfg = parse_config(
        r#"
        command = "render"
        horizon = 1
        [model]
        c = 3.2
        fractions = ["1/28", "1/39670"]
        "#,
    )
    .unwrap();
    assert_eq!(cfg.command, Command::Render);
    assert_eq!(cfg.model.constant().coeff(), &Rational::from((16, 5)));
    let qs: Vec<String> = cfg.model.prefix().iter().map(|r| r.q().to_string()).collect();
    assert_eq!(qs, ["28", "39670"]);
    assert_eq!(cfg.precision, PrecisionSpec::Auto);
    // 64 guard bits plus log2 28.
    assert_eq!(cfg.resolved_precision, 69);
    match &cfg.task {
        Task::Render(r) => {
            assert_eq!((r.window.width, r.window.height), (512, 512));
            assert_eq!(r.image, "render.pgm");
        }
        other => panic!("unexpected task {other:?}"),
    }
}

#[test]
fn constant_must_exceed_one() {
    let e = errors("command = \"centers\"\nhorizon = 1\n[model]\nc = 0.5\nfractions = [\"1/3\", \"1/2\"]\n");
    assert_eq!(e, ["model.c: C must exceed 1 (got 0.5)"]);
}

#[test]
fn t_out_of_range_names_the_level() {
    // t_1 = 2.4 * 1/2 = 1.2.
    let e = errors("command = \"centers\"\nhorizon = 1\n[model]\nc = 2.4\nfractions = [\"1/3\", \"1/2\"]\n");
    assert_eq!(e, ["model: t_1 = C*p_1/q_1 = 1.2 not in (0,1)"]);
}

#[test]
fn every_bad_level_is_reported() {
    let e = errors("command = \"centers\"\nhorizon = 2\n[model]\nc = 3\nfractions = [\"1/2\", \"1/3\", \"2/3\"]\n");
    assert_eq!(e.len(), 3, "{e:?}");
    assert!(e[0].contains("t_0 = C*p_0/q_0 = 1.5"));
    assert!(e[1].contains("t_1 = C*p_1/q_1 = 1"));
    assert!(e[2].contains("t_2 = C*p_2/q_2 = 2"));
}

#[test]
fn tower_generator_expands() {
    let cfg = parse_config(
        r#"
        command = "criterion"
        horizon = 6
        [model]
        c = 2
        generator = { kind = "tower", q0 = 3, p = 1 }
        "#,
    )
    .unwrap();
    let rot = cfg.model.rotations(7).unwrap();
    // Oracle: q_{n+1} = 2^{q_n} with exact integers while they are small.
    let mut q = Integer::from(3);
    for r in &rot[..4] {
        assert_eq!(r.q().exact(), Some(&q));
        assert_eq!(r.p(), 1);
        q = Integer::from(1) << q.to_u32().unwrap_or(0);
    }
    assert_eq!(rot[3].q().exact().unwrap().significant_bits(), 257);
    match rot[4].q() {
        Denominator::Power { base, exponent } => {
            assert_eq!(*base, 2);
            assert_eq!(exponent.exact(), rot[3].q().exact());
        }
        other => panic!("q_4 should be symbolic, got {other}"),
    }
    for n in 0..=6 {
        let t = cfg.model.t_value(n, 128).unwrap();
        assert!(!t.is_neg() && !t.is_zero());
    }
    assert_eq!(cfg.model.t_value(2, 128).unwrap().to_f64(), 2.0 / 256.0);
    assert!(matches!(cfg.task, Task::Criterion(CandidateSpec::Center { .. })));
}

#[test]
fn horizon_beyond_the_fractions_is_rejected() {
    let e = errors("command = \"centers\"\nhorizon = 2\n[model]\nc = 1.5\nfractions = [\"1/3\", \"1/2\"]\n");
    assert_eq!(e, ["horizon: horizon 2 needs 3 rotation numbers but only 2 are given"]);
}

#[test]
fn structural_errors() {
    assert!(errors("command = ")[0].starts_with("document:"));
    assert!(errors("command = \"centers\"\nhorison = 1\n")[0].contains("unknown field"));
    let e = errors("command = \"centers\"\nhorizon = 1\n[model]\nc = 2\n");
    assert_eq!(e, ["model: needs fractions or a generator"]);
    let e = errors(
        "command = \"centers\"\nhorizon = 1\n[model]\nc = 2\nfractions = [\"1/3\"]\ngenerator = { kind = \"tower\", q0 = 3 }\n",
    );
    assert_eq!(e, ["model: give either fractions or generator, not both"]);
}

#[test]
fn generator_fields_are_checked() {
    let e = errors("command = \"levin\"\nhorizon = 3\n[model]\nc = 2\ngenerator = { kind = \"affine\", q0 = 3, ratio = 2 }\n");
    assert_eq!(e, ["model.generator.ratio: does not apply to the affine generator"]);
    let e = errors("command = \"levin\"\nhorizon = 3\n[model]\nc = 2\ngenerator = { kind = \"spiral\", q0 = 3 }\n");
    assert!(e[0].starts_with("model.generator.kind: unknown generator"));
    let e = errors("command = \"levin\"\nhorizon = 3\n[model]\nc = 2\ngenerator = { kind = \"geometric\", q0 = 4, p = 2 }\n");
    assert_eq!(e, ["model.generator: fraction 2/4 is not reduced"]);
}

#[test]
fn command_sections_are_validated() {
    let base = "horizon = 2\n[model]\nc = 2\ngenerator = { kind = \"tower\", q0 = 3 }\n";
    let e = errors(&format!("command = \"criterion\"\n{base}[criterion]\ncandidate = \"theorem\"\nalpha = 0.5\nbeta = 2\n"));
    assert_eq!(e, ["criterion.beta: need 1 < beta < 1/alpha (got alpha = 0.5, beta = 2)"]);
    let e = errors(&format!("command = \"criterion\"\n{base}[criterion]\ncandidate = \"fixed\"\n"));
    assert_eq!(e, ["criterion.x: is required for the fixed rule"]);
    let e = errors(&format!("command = \"render\"\n{base}[render]\nx = [1, 0]\nwidth = 0\n"));
    assert_eq!(e, ["render.width: must lie in [1, 65536] (got 0)"]);
    let e = errors(&format!("command = \"render\"\n{base}[render]\nx = [1, 0]\n"));
    assert_eq!(e, ["render: invalid window: x_min 1 must be below x_max 0"]);
    let e = errors(&format!("command = \"verify\"\n{base}[verify]\nc_prime = 3\n"));
    assert_eq!(e, ["verify.c_prime: need 1 < C' <= C (got C = 2, C' = 3)"]);
    let e = errors(&format!("command = \"levin\"\n{base}[levin]\nstart = 5\nend = 4\n"));
    assert_eq!(e, ["levin.end: window [5, 4] is empty"]);
    let e = errors(&format!("command = \"address\"\n{base}[address]\npoints = [[0.5]]\n"));
    assert_eq!(e, ["address.points[0]: expected [re, im] with two numbers"]);
    let e = errors(&format!("command = \"centers\"\nprecision = 8\n{base}"));
    assert!(e[0].starts_with("precision: expected \"auto\" or an integer in [32, 65536]"));
}

#[test]
fn verify_defaults() {
    let cfg = parse_config("command = \"verify\"\nhorizon = 3\n[model]\nc = \"2pi\"\ngenerator = { kind = \"affine\", q0 = 7 }\n").unwrap();
    match &cfg.task {
        Task::Verify(v) => {
            assert_eq!(v.alpha.to_string(), "0.5");
            assert_eq!(v.beta.to_string(), "1.5");
            assert_eq!(v.samples, 1000);
            let mid = v.c_prime.value(64).to_f64();
            assert!((mid - (2.0 * std::f64::consts::PI + 1.0) / 2.0).abs() < 1e-11);
        }
        other => panic!("unexpected task {other:?}"),
    }
}
