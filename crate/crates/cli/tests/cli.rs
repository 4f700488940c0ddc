use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fear() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fear"));
    c.env_remove("FEAR_THREADS");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn matrix(csv: &str) -> Vec<Vec<f64>> {
    csv.split("\n\n")
        .next()
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn compute_reports_both_agents_courteous_in_case_a() {
    let o = run(fear().arg("compute").arg(scenario("case_a.json")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("actor\\affected,1,2\n"));
    let m = matrix(&text);
    assert!(m[0][1] < 0.0 && m[1][0] < 0.0, "{m:?}");
}

#[test]
fn compute_writes_audit_blocks_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = run(fear()
        .args(["compute", "--audit", "--raw", "-o"])
        .arg(&out)
        .arg(scenario("case_d.json")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.split("\n\n").count(), 4, "{text}");
    assert!(text.contains("raw\\affected"));
    assert!(text.contains("agent,V_actual,V_others_mdr"));
}

#[test]
fn mdr_override_changes_the_baseline() {
    let path = scenario("mdr_scene.json");
    let social = stdout(&run(fear().arg("compute").arg(&path)));
    let zero = stdout(&run(fear().args(["compute", "--mdr", "zero"]).arg(&path)));
    assert_ne!(social, zero);
    let printed = stdout(&run(fear().args(["mdr", "--policy", "zero"]).arg(&path)));
    let actions: serde_json::Value = serde_json::from_str(&printed).unwrap();
    assert_eq!(actions.as_array().unwrap().len(), 3);
    assert!(actions.as_array().unwrap().iter().all(|a| a["a"] == 0.0));
}

#[test]
fn missing_file_is_a_usage_error_naming_the_path() {
    let o = run(fear().args(["compute", "no/such/scene.json"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no/such/scene.json"));
}

#[test]
fn bad_inputs_are_usage_errors() {
    let gridlock = scenario("gridlock.json");
    let cases: Vec<Vec<String>> = vec![
        vec!["plan".into(), gridlock.display().to_string(), "--ego".into(), "3".into(), "--aggregate".into(), "median".into()],
        vec!["plan".into(), gridlock.display().to_string(), "--ego".into(), "9".into()],
        vec!["render".into(), gridlock.display().to_string(), "heatmap".into(), "-o".into(), "x.svg".into()],
        vec!["compute".into()],
    ];
    for args in cases {
        let o = run(fear().args(&args));
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema_version\": \"1\", \"agents\": [").unwrap();
    let o = run(fear().arg("compute").arg(&bad));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn thread_cap_is_validated_and_does_not_change_results() {
    let path = scenario("case_e.json");
    let o = run(fear().env("FEAR_THREADS", "zero").arg("compute").arg(&path));
    assert_eq!(o.status.code(), Some(2));
    let one = stdout(&run(fear().env("FEAR_THREADS", "1").arg("compute").arg(&path)));
    let four = stdout(&run(fear().env("FEAR_THREADS", "4").arg("compute").arg(&path)));
    let default = stdout(&run(fear().arg("compute").arg(&path)));
    assert_eq!(one, four);
    assert_eq!(one, default);
}

#[test]
fn plan_selections_differ_between_mean_and_max() {
    let path = scenario("gridlock.json");
    let selection = |agg: &str| {
        let o = run(fear().args(["plan", "--ego", "3", "--aggregate", agg]).arg(&path));
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let table = stdout(&o);
        assert_eq!(table.lines().count(), 1 + 256);
        assert!(table.starts_with("a,theta,fear_1,"));
        let line = stderr(&o);
        let picked = line.split(": ").nth(1).unwrap().split(' ').take(2).collect::<Vec<_>>().join(" ");
        println!("{agg}: {picked}");
        picked
    };
    assert_ne!(selection("mean"), selection("max"));
}

#[test]
fn plan_without_a_safe_candidate_exits_three() {
    let walls = "[[-1.5,-1.5],[1.5,-1.5],[1.5,-0.5],[-1.5,-0.5]], [[-1.5,0.5],[1.5,0.5],[1.5,1.5],[-1.5,1.5]],
        [[-1.5,-0.5],[-0.5,-0.5],[-0.5,0.5],[-1.5,0.5]], [[0.5,-0.5],[1.5,-0.5],[1.5,0.5],[0.5,0.5]]";
    let doc = format!(
        r#"{{"schema_version": "1",
            "agents": [{{"id": 1, "x": 0, "y": 0, "vx": 0, "vy": 0, "box_side": 1, "action": {{"a": 0, "theta": 0}}}},
                       {{"id": 2, "x": 6, "y": 0, "vx": 0, "vy": 0, "box_side": 1, "action": {{"a": 0, "theta": 0}}}}],
            "obstacles": [{walls}],
            "params": {{"T": 2, "N_t": 4, "a_max": 1, "N_m": 2, "N_d": 4}},
            "mdr": {{"policy": "zero"}}}}"#
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("boxed.json");
    fs::write(&path, doc).unwrap();
    let o = run(fear().args(["plan", "--ego", "1", "--grid-magnitudes", "2", "--grid-directions", "4"]).arg(&path));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no collision-free candidate"));
}

#[test]
fn render_targets_draw_the_expected_elements() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("gridlock.json");
    let render = |what: &str| {
        let out = dir.path().join(format!("{}.svg", what.replace(':', "_")));
        let o = run(fear().arg("render").arg(&path).arg(what).arg("-o").arg(&out));
        assert_eq!(o.status.code(), Some(0), "{what}: {}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let scene = render("scene");
    assert!(scene.starts_with("<svg"));
    assert_eq!(scene.matches("class=\"agent\"").count(), 8);
    let feas = render("feasibility:3");
    let sectors = feas.matches("class=\"feasible\"").count() + feas.matches("class=\"infeasible\"").count();
    assert_eq!(sectors, 8 * 16);
    let plan = render("plan:3:mean");
    assert_eq!(plan.matches("class=\"cell\"").count(), 256);
    assert_eq!(plan.matches("class=\"selected\"").count(), 1);
    let traj = render("trajectories");
    assert!(traj.matches("class=\"hull\"").count() >= 8);
}

#[test]
fn casestudies_write_every_artifact_deterministically() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = run(fear().arg("casestudies").arg(dir.path()));
        assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("21 matrices"));
    }
    let csvs: Vec<String> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.iter().filter(|n| n.starts_with("case_")).count(), 12);
    assert_eq!(csvs.iter().filter(|n| n.starts_with("mdr_")).count(), 9);
    for name in csvs.iter().map(String::as_str).chain(["report.md"]) {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    let l = matrix(&fs::read_to_string(a.path().join("case_l.csv")).unwrap());
    assert_eq!((l[0][1], l[2][1], l[1][1]), (0.0, 0.0, 0.0));
}
