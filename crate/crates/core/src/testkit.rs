//! Catalog builders and random catalog generation for tests.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::catalog::{
    ApplicationSpec, Attribute, AttributeValue, Catalog, CatalogDocument, CompatibilityClaim, Justification,
    JustificationLevel, Orientation, Polarity, Port, Product, ProductSeries, Scope,
};
use crate::reasoning::{QueryRequirements, DATA_CONNECTION, EECD, END_EFFECTOR, FLANGE_ADAPTER, ROBOTIC_ARM};

pub use Orientation::{Input as IN, Output as OUT};

pub fn primary(source: &str) -> Justification {
    Justification::new(JustificationLevel::Primary, source)
}

/// Terse catalog authoring for fixtures.
#[derive(Debug, Clone, Default)]
pub struct CatalogBuilder {
    doc: CatalogDocument,
}

impl CatalogBuilder {
    /// Starts with the applications `any`, `pick-and-place` and `screwdriving`.
    pub fn new() -> Self {
        let mut doc = CatalogDocument::new();
        doc.applications = standard_applications();
        Self { doc }
    }

    pub fn product(mut self, id: &str, product_type: &str, ports: &[(&str, Orientation, &str)]) -> Self {
        self.doc.products.push(Product {
            id: id.into(),
            display_name: id.into(),
            manufacturer: "acme".into(),
            series_id: None,
            attributes: vec![Attribute::new("type", product_type, primary("ds"))],
            ports: ports
                .iter()
                .map(|(pid, o, ty)| Port::new(*pid, *o, AttributeValue::new(*ty, primary("ds"))))
                .collect(),
        });
        self
    }

    pub fn end_effector(self, id: &str, subtype: &str, ports: &[(&str, Orientation, &str)]) -> Self {
        let mut b = self.product(id, END_EFFECTOR, ports);
        b.doc
            .products
            .last_mut()
            .unwrap()
            .attributes
            .push(Attribute::new("subtype", subtype, primary("ds")));
        b
    }

    pub fn attribute(mut self, product: &str, name: &str, value: &str) -> Self {
        let p = self
            .doc
            .products
            .iter_mut()
            .find(|p| p.id == product)
            .expect("attribute on an existing product");
        p.attributes.push(Attribute::new(name, value, primary("ds")));
        self
    }

    pub fn claim(mut self, claim: CompatibilityClaim) -> Self {
        self.doc.claims.push(claim);
        self
    }

    pub fn document(self) -> CatalogDocument {
        self.doc
    }

    pub fn build(self) -> Catalog {
        Catalog::from_document(self.doc).expect("builder catalog is well-formed")
    }
}

pub fn standard_applications() -> Vec<ApplicationSpec> {
    vec![
        ApplicationSpec {
            name: "any".into(),
            end_effector_subtype: None,
        },
        ApplicationSpec {
            name: "pick-and-place".into(),
            end_effector_subtype: Some("gripper".into()),
        },
        ApplicationSpec {
            name: "screwdriving".into(),
            end_effector_subtype: Some("screwdriver".into()),
        },
    ]
}

/// One arm, EECD, gripper and data connection that fit together exactly
/// one way: arm -> EECD -> gripper mechanically, arm -> cable -> gripper
/// for data.
pub fn single_chain() -> CatalogBuilder {
    CatalogBuilder::new()
        .product(
            "arm",
            ROBOTIC_ARM,
            &[("flange", OUT, "robot_flange_iso50"), ("io", OUT, "m8_data")],
        )
        .product(
            "eecd",
            EECD,
            &[("robot_side", IN, "robot_flange_iso50"), ("tool_side", OUT, "tool_a")],
        )
        .end_effector("gripper", "gripper", &[("mount", IN, "tool_a"), ("io", IN, "m8_tool")])
        .product(
            "cable",
            DATA_CONNECTION,
            &[("in", IN, "m8_data"), ("out", OUT, "m8_tool")],
        )
}

const FLANGES: [&str; 2] = ["robot_flange_a", "robot_flange_b"];
const TOOLS: [&str; 2] = ["tool_x", "tool_y"];
const BUSES: [&str; 2] = ["bus_1", "bus_2"];
const SUBTYPES: [&str; 2] = ["gripper", "screwdriver"];

fn random_level(rng: &mut impl Rng) -> JustificationLevel {
    *JustificationLevel::ALL.choose(rng).unwrap()
}

/// Picks the first interface of `pool` most of the time so that
/// generated products fit together often enough to be interesting.
fn random_port(rng: &mut impl Rng, id: &str, o: Orientation, pool: &[&str]) -> Port {
    let level = random_level(rng);
    let ty = if rng.random_bool(0.85) { pool[0] } else { pool[1] };
    Port::new(
        id,
        o,
        AttributeValue::new(ty, Justification::new(level, format!("ds-{id}"))),
    )
}

/// A random, valid catalog of 4 to 12 products.
///
/// The first few products cover every role so that queries have a fair
/// chance of finding something; ids are shuffled so that id order and role
/// order disagree.
pub fn random_document(rng: &mut impl Rng) -> CatalogDocument {
    let n = rng.random_range(4..=12usize);
    let mut types: Vec<&str> = vec![ROBOTIC_ARM, EECD, END_EFFECTOR, DATA_CONNECTION];
    if n >= 5 && rng.random_bool(0.6) {
        types.push(FLANGE_ADAPTER);
    }
    let pool = [
        ROBOTIC_ARM,
        EECD,
        EECD,
        END_EFFECTOR,
        END_EFFECTOR,
        DATA_CONNECTION,
        FLANGE_ADAPTER,
    ];
    while types.len() < n {
        types.push(pool.choose(rng).unwrap());
    }
    types.truncate(n);
    let mut ids: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
    ids.shuffle(rng);

    let mut doc = CatalogDocument::new();
    doc.applications = standard_applications();
    let arm_series = rng.random_bool(0.3);
    if arm_series {
        doc.series.push(ProductSeries {
            id: "arm_series".into(),
            display_name: "Arm series".into(),
            attributes: vec![Attribute::new("type", ROBOTIC_ARM, primary("series-ds"))],
            ports: vec![random_port(rng, "flange", OUT, &FLANGES)],
        });
    }

    for (id, ty) in ids.iter().zip(&types) {
        let mut ports = Vec::new();
        let mut attributes = vec![Attribute::new("type", *ty, primary(&format!("ds-{id}")))];
        let mut series_id = None;
        match *ty {
            ROBOTIC_ARM => {
                if arm_series && rng.random_bool(0.5) {
                    series_id = Some("arm_series".to_string());
                    attributes.clear();
                } else {
                    ports.push(random_port(rng, "flange", OUT, &FLANGES));
                }
                ports.push(random_port(rng, "bus", OUT, &BUSES));
                if rng.random_bool(0.1) {
                    ports.push(random_port(rng, "bus2", OUT, &BUSES));
                }
            }
            FLANGE_ADAPTER => {
                ports.push(random_port(rng, "robot_side", IN, &FLANGES));
                ports.push(random_port(rng, "tool_side", OUT, &FLANGES));
            }
            EECD => {
                ports.push(random_port(rng, "robot_side", IN, &FLANGES));
                ports.push(random_port(rng, "tool_side", OUT, &TOOLS));
                if rng.random_bool(0.1) {
                    ports.push(random_port(rng, "bus", IN, &BUSES));
                }
            }
            END_EFFECTOR => {
                ports.push(random_port(rng, "mount", IN, &TOOLS));
                ports.push(random_port(rng, "bus", IN, &BUSES));
                let subtype = *SUBTYPES.choose(rng).unwrap();
                attributes.push(Attribute::new("subtype", subtype, primary(&format!("ds-{id}"))));
            }
            _ => {
                ports.push(random_port(rng, "in", IN, &BUSES));
                ports.push(random_port(rng, "out", OUT, &BUSES));
                if rng.random_bool(0.1) {
                    ports.push(random_port(rng, "out2", OUT, &BUSES));
                }
            }
        }
        doc.products.push(Product {
            id: id.clone(),
            display_name: format!("{ty} {id}"),
            manufacturer: ["oem_a", "oem_b", "oem_c"].choose(rng).unwrap().to_string(),
            series_id,
            attributes,
            ports,
        });
    }

    let claims = rng.random_range(0..=5);
    for k in 0..claims {
        if let Some(c) = random_claim(rng, &doc, k) {
            doc.claims.push(c);
        }
    }
    if rng.random_bool(0.5) {
        let evidence = random_evidence(rng, &doc);
        doc.claims.extend(evidence);
    }
    doc
}

/// Compatible direct claims on some of the product pairs that share an
/// interface, so that thresholded queries can succeed.
fn random_evidence(rng: &mut impl Rng, doc: &CatalogDocument) -> Vec<CompatibilityClaim> {
    let catalog = Catalog::from_document(doc.clone()).expect("generated catalog is well-formed");
    let products = catalog.products();
    let mut claims = Vec::new();
    for (i, a) in products.iter().enumerate() {
        for b in &products[i + 1..] {
            let fits = a.ports().any(|pa| {
                b.ports()
                    .any(|pb| pa.orientation != pb.orientation && pa.port_type.value == pb.port_type.value)
            });
            if fits && rng.random_bool(0.7) {
                let level = random_level(rng);
                claims.push(CompatibilityClaim::new(
                    Polarity::Compatible,
                    Scope::Direct,
                    a.id.clone(),
                    b.id.clone(),
                    Justification::new(level, "integration report"),
                ));
            }
        }
    }
    claims
}

fn random_claim(rng: &mut impl Rng, doc: &CatalogDocument, k: usize) -> Option<CompatibilityClaim> {
    let ids: Vec<&str> = doc.products.iter().map(|p| p.id.as_str()).collect();
    let mut pick = ids.choose_multiple(rng, 2);
    let mut a = pick.next()?.to_string();
    let b = pick.next()?.to_string();
    if !doc.series.is_empty() && rng.random_bool(0.15) {
        a = doc.series[0].id.clone();
    }
    let polarity = if rng.random_bool(0.6) {
        Polarity::Incompatible
    } else {
        Polarity::Compatible
    };
    let scope = if rng.random_bool(0.5) {
        Scope::Direct
    } else {
        Scope::Configuration
    };
    let level = random_level(rng);
    let mut claim = CompatibilityClaim::new(
        polarity,
        scope,
        a.clone(),
        b.clone(),
        Justification::new(level, format!("gen-{k}")),
    );
    if scope == Scope::Direct && rng.random_bool(0.35) {
        let mediators: Vec<&Product> = doc
            .products
            .iter()
            .filter(|p| p.id != a && p.id != b)
            .filter(|p| {
                p.attributes
                    .iter()
                    .any(|x| x.name == "type" && x.value.value == DATA_CONNECTION)
            })
            .collect();
        if let Some(m) = mediators.choose(rng) {
            claim = claim.with_mediator(m.id.clone());
        }
    }
    Some(claim)
}

/// An unconditioned configuration-scope incompatibility between two random products.
pub fn random_coexistence_ban(rng: &mut impl Rng, doc: &CatalogDocument) -> CompatibilityClaim {
    let ids: Vec<&str> = doc.products.iter().map(|p| p.id.as_str()).collect();
    let pair: Vec<&&str> = ids.choose_multiple(rng, 2).collect();
    CompatibilityClaim::new(
        Polarity::Incompatible,
        Scope::Configuration,
        *pair[0],
        *pair[1],
        Justification::new(random_level(rng), "random-ban"),
    )
}

pub fn random_query(rng: &mut impl Rng) -> QueryRequirements {
    let app = *["any", "any", "pick-and-place", "screwdriving"].choose(rng).unwrap();
    let k = if rng.random_bool(0.4) { 5 } else { 4 };
    let threshold = if rng.random_bool(0.7) {
        None
    } else {
        Some(random_level(rng))
    };
    QueryRequirements::new(app, k)
        .expect("4 and 5 are valid sizes")
        .with_min_justification(threshold)
}
