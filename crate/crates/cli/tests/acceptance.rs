//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

use robocim_core::catalog::{Justification, JustificationLevel, Polarity, Scope};
use robocim_core::reasoning::{Rule, Violation};
use robocim_core::testkit::{
    random_coexistence_ban, random_document, random_query, single_chain, CatalogBuilder, IN, OUT,
};
use robocim_core::{
    check_configuration, check_port_connection, enumerate_bruteforce, enumerate_configurations, load_catalog,
    parse_catalog, required_ports_check, Catalog, CatalogError, Certainty, Configuration, Connection, PortRef,
    QueryRequirements,
};
use robocim_service::{router, ServiceConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const FIXTURES: [&str; 8] = [
    "minimal.json",
    "single.json",
    "double_eecd.json",
    "modbus_control_box.json",
    "mediated_eecd.json",
    "missing_property.json",
    "inconsistent_sources.json",
    "three_vendors.json",
];

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn fixture(name: &str) -> Catalog {
    load_catalog(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn q(app: &str, k: usize) -> QueryRequirements {
    QueryRequirements::new(app, k).unwrap()
}

fn conn(a: (&str, &str), b: (&str, &str)) -> Connection {
    Connection::new(PortRef::new(a.0, a.1), PortRef::new(b.0, b.1))
}

fn ids(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn applications(c: &Catalog) -> Vec<String> {
    c.applications().iter().map(|a| a.name.clone()).collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut runs, mut nonempty, mut configs) = (0, 0, 0);
    for catalog_no in 0..200 {
        let doc = random_document(&mut rng);
        let n = doc.products.len();
        ensure!((4..=12).contains(&n), "catalog {catalog_no} has {n} products");
        let c = Catalog::from_document(doc).map_err(|e| e.to_string())?;
        for k in [4, 5] {
            let base = random_query(&mut rng);
            let req = QueryRequirements::new(base.application.clone(), k)
                .unwrap()
                .with_min_justification(base.min_justification);
            let fast = enumerate_configurations(&c, &req).map_err(|e| e.to_string())?;
            let slow = enumerate_bruteforce(&c, &req).map_err(|e| e.to_string())?;
            ensure!(
                fast == slow,
                "catalog {catalog_no}, {req:?}: solver {} vs oracle {}",
                fast.len(),
                slow.len()
            );
            runs += 1;
            configs += fast.len();
            nonempty += usize::from(!fast.is_empty());
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    ensure!(nonempty * 5 >= runs, "only {nonempty} of {runs} queries had results");
    Ok(format!(
        "200 catalogs, {runs} queries ({nonempty} non-empty, {configs} configurations), 0 discrepancies in {:.2?}",
        elapsed
    ))
}

fn has_rule(violations: &[Violation], rule: Rule) -> bool {
    violations.iter().any(|v| v.rule == rule)
}

fn single_matching() -> Vec<Connection> {
    vec![
        conn(("arm", "flange"), ("eecd", "robot_side")),
        conn(("arm", "io"), ("cable", "in")),
        conn(("cable", "out"), ("gripper", "io")),
        conn(("eecd", "tool_side"), ("gripper", "mount")),
    ]
}

fn single_products() -> Vec<String> {
    ids(&["arm", "eecd", "gripper", "cable"])
}

fn constraint_coverage() -> Outcome {
    let mut checked = Vec::new();
    let base = single_chain().build();
    let ok = |c: &Catalog, req: &QueryRequirements| {
        check_configuration(c, &single_products(), &single_matching(), req).unwrap()
    };
    ensure!(ok(&base, &q("any", 4)).is_empty(), "baseline single chain rejected");

    // Constraint 1: a port cannot be connected to itself.
    let flange = PortRef::new("arm", "flange");
    let selfie = check_port_connection(&base, &flange, &flange).unwrap();
    let proper = check_port_connection(&base, &flange, &PortRef::new("eecd", "robot_side")).unwrap();
    ensure!(
        !selfie.structural_ok && proper.structural_ok,
        "constraint 1 (no self-connection)"
    );
    checked.push(1);

    // Constraint 2: every port has an orientation.
    let mut text: serde_json::Value = serde_json::from_str(&base.to_json_pretty()).unwrap();
    parse_catalog(&text.to_string()).map_err(|e| format!("constraint 2 pass fixture: {e}"))?;
    text["products"][0]["ports"][0]
        .as_object_mut()
        .unwrap()
        .remove("orientation");
    let missing = parse_catalog(&text.to_string());
    text["products"][0]["ports"][0]["orientation"] = "sideways".into();
    let bogus = parse_catalog(&text.to_string());
    ensure!(
        matches!(missing, Err(CatalogError::Schema { .. })) && matches!(bogus, Err(CatalogError::Schema { .. })),
        "constraint 2 (port orientation required): {missing:?} / {bogus:?}"
    );
    checked.push(2);

    // Constraint 3: connected ports have opposite orientation and the same interface.
    let c3 = single_chain()
        .product("arm2", "robotic_arm", &[("flange", OUT, "robot_flange_iso50")])
        .product("eecd2", "eecd", &[("robot_side", IN, "robot_flange_iso63")])
        .build();
    let both_out = check_port_connection(&c3, &flange, &PortRef::new("arm2", "flange")).unwrap();
    let other_if = check_port_connection(&c3, &flange, &PortRef::new("eecd2", "robot_side")).unwrap();
    let proper = check_port_connection(&c3, &flange, &PortRef::new("eecd", "robot_side")).unwrap();
    ensure!(
        !both_out.structural_ok && !other_if.structural_ok && proper.structural_ok,
        "constraint 3 (opposite orientation, same interface)"
    );
    checked.push(3);

    // Constraint 4: directly incompatible products cannot be connected.
    let ban = |scope| {
        single_chain()
            .claim(robocim_core::catalog::CompatibilityClaim::new(
                Polarity::Incompatible,
                scope,
                "arm",
                "eecd",
                Justification::new(JustificationLevel::Primary, "datasheet"),
            ))
            .build()
    };
    let direct = ban(Scope::Direct);
    ensure!(
        has_rule(&ok(&direct, &q("any", 4)), Rule::DirectIncompatibility),
        "constraint 4 fail fixture accepted"
    );
    let unrelated = single_chain()
        .claim(robocim_core::catalog::CompatibilityClaim::new(
            Polarity::Incompatible,
            Scope::Direct,
            "arm",
            "gripper",
            Justification::new(JustificationLevel::Primary, "datasheet"),
        ))
        .build();
    ensure!(
        ok(&unrelated, &q("any", 4)).is_empty(),
        "constraint 4 pass fixture rejected (not directly connected)"
    );
    checked.push(4);

    // Constraint 5: products that must not coexist in one configuration.
    let coexist = ban(Scope::Configuration);
    ensure!(
        has_rule(&ok(&coexist, &q("any", 4)), Rule::CoexistenceIncompatibility),
        "constraint 5 fail fixture accepted"
    );
    ensure!(
        enumerate_configurations(&coexist, &q("any", 4)).unwrap().is_empty(),
        "constraint 5 solver still emits"
    );
    ensure!(ok(&base, &q("any", 4)).is_empty(), "constraint 5 pass fixture rejected");
    checked.push(5);

    // Constraint 6: a primary-only query rejects connections without primary evidence.
    let primary = q("any", 4).with_min_justification(Some(JustificationLevel::Primary));
    ensure!(
        has_rule(&ok(&base, &primary), Rule::DefaultBelowThreshold),
        "constraint 6 fail fixture accepted"
    );
    let mut backed = single_chain();
    for m in single_matching() {
        backed = backed.claim(robocim_core::catalog::CompatibilityClaim::new(
            Polarity::Compatible,
            Scope::Direct,
            m.a.product.clone(),
            m.b.product.clone(),
            Justification::new(JustificationLevel::Primary, "integration test report"),
        ));
    }
    let backed = backed.build();
    ensure!(ok(&backed, &primary).is_empty(), "constraint 6 pass fixture rejected");
    let found = enumerate_configurations(&backed, &primary).unwrap();
    ensure!(
        found.len() == 1 && found[0].certainty == Certainty::Primary,
        "constraint 6 certainty"
    );
    checked.push(6);

    // Constraint 7: exactly one arm, EECD, end-effector and data connection.
    let c7 = single_chain()
        .product(
            "cable2",
            "data_connection",
            &[("in", IN, "m8_tool"), ("out", OUT, "tool_a")],
        )
        .build();
    let no_eecd = check_configuration(&c7, &ids(&["arm", "gripper", "cable", "cable2"]), &[], &q("any", 4)).unwrap();
    ensure!(
        has_rule(&no_eecd, Rule::RoleCount),
        "constraint 7 fail fixture accepted"
    );
    ensure!(ok(&c7, &q("any", 4)).is_empty(), "constraint 7 pass fixture rejected");
    checked.push(7);

    // Constraint 8: a robotic arm must expose a robot flange port.
    let c8 = CatalogBuilder::new()
        .product("flangeless", "robotic_arm", &[("io", OUT, "m8_data")])
        .product("arm", "robotic_arm", &[("flange", OUT, "robot_flange_iso50")])
        .build();
    ensure!(
        !required_ports_check(&c8, c8.product("flangeless").unwrap()).is_empty(),
        "constraint 8 fail fixture accepted"
    );
    ensure!(
        required_ports_check(&c8, c8.product("arm").unwrap()).is_empty(),
        "constraint 8 pass fixture rejected"
    );
    checked.push(8);

    // Constraint 9: the end-effector must suit the requested application.
    ensure!(
        has_rule(&ok(&base, &q("screwdriving", 4)), Rule::ApplicationSubtype),
        "constraint 9 fail fixture accepted"
    );
    ensure!(
        ok(&base, &q("pick-and-place", 4)).is_empty(),
        "constraint 9 pass fixture rejected"
    );
    checked.push(9);

    Ok(format!(
        "constraints {checked:?} each rejected a failing and accepted a passing fixture"
    ))
}

fn adjacency(cfg: &Configuration) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for m in &cfg.matching {
        adj.entry(&m.a.product).or_default().insert(&m.b.product);
        adj.entry(&m.b.product).or_default().insert(&m.a.product);
    }
    adj
}

/// Whether some simple path from `from` to `to` visits `via`.
fn path_through(adj: &BTreeMap<&str, BTreeSet<&str>>, from: &str, to: &str, via: &str) -> bool {
    fn walk<'a>(
        adj: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        at: &'a str,
        to: &str,
        via: &str,
        seen: &mut Vec<&'a str>,
    ) -> bool {
        if at == to {
            return seen.contains(&via);
        }
        for next in adj.get(at).into_iter().flatten() {
            if !seen.contains(next) {
                seen.push(next);
                if walk(adj, next, to, via, seen) {
                    return true;
                }
                seen.pop();
            }
        }
        false
    }
    walk(adj, from, to, via, &mut vec![from])
}

fn directly_connected(cfg: &Configuration, a: &str, b: &str) -> bool {
    cfg.matching
        .iter()
        .any(|m| (m.a.product == a && m.b.product == b) || (m.a.product == b && m.b.product == a))
}

fn pathology_fixtures() -> Outcome {
    // Misleading compatibility: the Modbus arm and gripper only meet through the control box.
    let c = fixture("modbus_control_box.json");
    let found = enumerate_configurations(&c, &q("any", 4)).unwrap();
    let mut routed = 0;
    for cfg in &found {
        ensure!(
            check_configuration(&c, &cfg.products, &cfg.matching, &q("any", 4))
                .unwrap()
                .is_empty(),
            "modbus re-check"
        );
        ensure!(
            !directly_connected(cfg, "cobot_m", "gripper_mb"),
            "modbus pair connected directly: {cfg:?}"
        );
        if cfg.products.iter().any(|p| p == "cobot_m") && cfg.products.iter().any(|p| p == "gripper_mb") {
            ensure!(
                path_through(&adjacency(cfg), "cobot_m", "gripper_mb", "data_control_box"),
                "not routed via box"
            );
            routed += 1;
        }
    }
    ensure!(
        routed > 0,
        "no configuration routes the Modbus pair through the control box"
    );

    // Misleading incompatibility: the arm and EECD fit only with the named data connection.
    let c = fixture("mediated_eecd.json");
    let found = enumerate_configurations(&c, &q("any", 4)).unwrap();
    let mut mediated = 0;
    for cfg in &found {
        ensure!(
            check_configuration(&c, &cfg.products, &cfg.matching, &q("any", 4))
                .unwrap()
                .is_empty(),
            "mediated re-check"
        );
        if directly_connected(cfg, "arm_x", "eecd_y") {
            ensure!(
                path_through(&adjacency(cfg), "arm_x", "eecd_y", "dc_special"),
                "arm_x/eecd_y without dc_special: {cfg:?}"
            );
            mediated += 1;
        }
    }
    ensure!(mediated > 0, "no configuration uses the mediated pair");
    Ok(format!(
        "control box routes {routed} Modbus configuration(s); {mediated} arm/EECD configuration(s) all via dc_special"
    ))
}

fn threshold_monotonicity() -> Outcome {
    let mut queries = 0;
    for name in FIXTURES {
        let c = fixture(name);
        for app in applications(&c) {
            for k in [4, 5] {
                let mut previous: Option<Vec<Configuration>> = None;
                let levels = std::iter::once(None).chain(JustificationLevel::ALL.iter().rev().map(|l| Some(*l)));
                for level in levels {
                    let req = q(&app, k).with_min_justification(level);
                    let now = enumerate_configurations(&c, &req).unwrap();
                    for cfg in &now {
                        ensure!(
                            cfg.certainty.meets(level),
                            "{name} {app}/{k}: certainty {} below {level:?}",
                            cfg.certainty
                        );
                        if let Some(prev) = &previous {
                            ensure!(
                                prev.contains(cfg),
                                "{name} {app}/{k}: {level:?} result missing at weaker threshold"
                            );
                        }
                    }
                    previous = Some(now);
                    queries += 1;
                }
            }
        }
    }
    Ok(format!(
        "{} fixtures, {queries} queries, every chain nested",
        FIXTURES.len()
    ))
}

fn claim_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1a1);
    let shipped: Vec<Catalog> = FIXTURES
        .iter()
        .map(|name| fixture(name))
        .filter(|c| c.products().len() >= 2 && !c.applications().is_empty())
        .collect();
    let mut reduced = 0;
    for trial in 0..100 {
        let doc = if rng.random_bool(0.5) {
            random_document(&mut rng)
        } else {
            shipped[rng.random_range(0..shipped.len())].document().clone()
        };
        let c = Catalog::from_document(doc.clone()).unwrap();
        let apps = applications(&c);
        let req = q(
            &apps[rng.random_range(0..apps.len())],
            if rng.random_bool(0.5) { 4 } else { 5 },
        );
        let before = enumerate_configurations(&c, &req).unwrap().len();
        let mut banned = doc.clone();
        let claim = random_coexistence_ban(&mut rng, &doc);
        ensure!(
            claim.condition.is_none() && claim.scope == Scope::Configuration,
            "ban is not unconditioned coexistence"
        );
        banned.claims.push(claim);
        let after = enumerate_configurations(&Catalog::from_document(banned).unwrap(), &req)
            .unwrap()
            .len();
        ensure!(after <= before, "trial {trial}: {before} -> {after}");
        reduced += usize::from(after < before);
    }
    Ok(format!("100 trials, count never increased ({reduced} decreased)"))
}

fn cli_configure(name: &str, app: &str, k: usize) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_robocim"))
        .arg("configure")
        .arg(fixture_path(name))
        .args(["--application", app, "--size", &k.to_string(), "--format", "json"])
        .env_remove(robocim_core::report::MAX_RESULTS_ENV)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{name} {app}/{k}: exit {:?}", out.status.code());
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for name in FIXTURES {
        let c = fixture(name);
        let app_router = router(c.clone(), &ServiceConfig::default());
        for app in applications(&c) {
            for k in [4, 5] {
                let first = cli_configure(name, &app, k)?;
                let second = cli_configure(name, &app, k)?;
                ensure!(first == second, "{name} {app}/{k}: CLI runs differ");
                let body = format!(r#"{{"application":"{app}","size_k":{k}}}"#);
                let service = runtime.block_on(async {
                    let req = Request::post("/api/configure").body(Body::from(body)).unwrap();
                    let resp = app_router.clone().oneshot(req).await.unwrap();
                    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
                    String::from_utf8(bytes.to_vec()).unwrap()
                });
                ensure!(
                    first == service,
                    "{name} {app}/{k}: CLI output differs from service body"
                );
                compared += 1;
            }
        }
    }
    Ok(format!(
        "{compared} queries: CLI runs byte-identical and equal to service bodies"
    ))
}

fn sample_catalog_ordering() -> Outcome {
    let c = fixture("three_vendors.json");
    let vendors: BTreeSet<&str> = c.products().iter().map(|p| p.manufacturer.as_str()).collect();
    ensure!(
        c.products().len() == 20 && vendors.len() == 3,
        "catalog shape {} products / {} vendors",
        c.products().len(),
        vendors.len()
    );
    let count = |app: &str, k| enumerate_configurations(&c, &q(app, k)).unwrap().len();
    let (any4, any5, pnp, screw) = (
        count("any", 4),
        count("any", 5),
        count("pick-and-place", 4),
        count("screwdriving", 4),
    );
    ensure!(screw < pnp, "screwdriving {screw} !< pick-and-place {pnp}");
    ensure!(any5 < any4, "k=5 {any5} !< k=4 {any4}");
    ensure!(screw > 0 && any5 > 0, "degenerate counts");
    Ok(format!(
        "any/4={any4} any/5={any5} pick-and-place={pnp} screwdriving={screw}"
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("constraint coverage", constraint_coverage),
        ("pathology fixtures", pathology_fixtures),
        ("threshold monotonicity", threshold_monotonicity),
        ("claim monotonicity", claim_monotonicity),
        ("determinism", determinism),
        ("sample catalog ordering", sample_catalog_ordering),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
