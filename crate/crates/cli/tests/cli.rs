use std::process::{Command, Output};

fn bdf3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdf3")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn re_root_prints_limit_and_passes_check() {
    let out = bdf3(&["--check", "re-root"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("Re,residual,gamma_bar,Re_bar"));
    let re: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((re - 1.4877).abs() < 5e-4);
}

#[test]
fn converge_csv_is_deterministic() {
    let args = ["converge", "--levels", "40,80", "--grid", "8"];
    let (a, b) = (bdf3(&args), bdf3(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("N,tau,eN,order,rmax,N1\n"));
}

#[test]
fn converge_markdown_has_table_rows() {
    let out = bdf3(&["converge", "--levels", "40,80", "--grid", "8", "--format", "md"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().all(|l| l.starts_with('|')));
}

#[test]
fn ratio_multiples_resolve_against_limit() {
    let two = stdout(&bdf3(&["eigscan", "--re", "2Re", "--n", "10", "--runs", "3"]));
    let plain = stdout(&bdf3(&["eigscan", "--re", "2.9754048312", "--n", "10", "--runs", "3"]));
    let head = |s: &str| s.lines().take(4).map(|l| l.to_string()).collect::<Vec<_>>();
    assert_eq!(head(&two)[0], "run,min_eig");
    let parse = |s: &str| -> Vec<f64> {
        s.lines().skip(1).take(3).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
    };
    for (a, b) in parse(&two).iter().zip(parse(&plain)) {
        assert!((a - b).abs() < 1e-6 * a.abs().max(1.0));
    }
}

#[test]
fn failing_check_exits_with_one() {
    let out = bdf3(&["--check", "trunc", "--fn", "sin", "--levels", "6,8"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bdf3(&["trunc", "--fn", "sin", "--levels", "6,8"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bdf3(&["eigscan", "--re", "2x"]).status.code(), Some(2));
    assert_eq!(bdf3(&["trunc", "--levels", "7"]).status.code(), Some(2));
    assert_eq!(bdf3(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(bdf3(&["eigscan", "--runs", "0"]).status.code(), Some(2));
}

#[test]
fn subcommand_headers() {
    let cases: [(&[&str], &str); 4] = [
        (&["energy", "--n", "20", "--grid", "8"], "n,E,grad_term,reaction_term,G_term,delta_E"),
        (&["doc-stats", "--n", "20"], "n,row_abs_sum,theta_0"),
        (&["trunc"], "tau,zeta,slope"),
        (&["eigscan", "--n", "10", "--runs", "2"], "run,min_eig"),
    ];
    for (args, header) in cases {
        let out = bdf3(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&out).lines().next(), Some(header));
    }
}

#[test]
fn checks_pass_on_defaults() {
    for args in [
        &["--check", "energy", "--n", "40", "--grid", "8"][..],
        &["--check", "doc-stats", "--n", "100"],
        &["--check", "trunc", "--fn", "cubic"],
        &["--check", "lemmas", "--grid", "16", "--samples", "500"],
    ] {
        assert_eq!(bdf3(args).status.code(), Some(0), "{args:?}");
    }
}
