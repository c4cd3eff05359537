//! Domain model and on-disk format of a product catalog.
//!
//! A catalog is the configurator's knowledge base: products with typed,
//! oriented ports, the series they belong to, the applications a user can
//! ask for, and the compatibility claims that override the default
//! assumption that equal interfaces fit together. Every fact carries a
//! [`Justification`] so that queries can demand a minimum evidence level.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Only format version understood by this crate.
pub const FORMAT_VERSION: u32 = 1;

/// Product kinds the application rules know about.
pub const KNOWN_PRODUCT_TYPES: [&str; 5] = [
    "robotic_arm",
    "eecd",
    "end_effector",
    "data_connection",
    "flange_adapter",
];

/// Strength of the source behind a fact or a claim.
///
/// The derived `Ord` runs from weakest to strongest, so `Primary` compares
/// greatest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JustificationLevel {
    /// Assumption made by a domain expert.
    Observation,
    /// Documentation published by another manufacturer.
    Secondary,
    /// Result of physically trying the products together.
    Empirical,
    /// Data sheet or manual from the product's own manufacturer.
    Primary,
}

impl JustificationLevel {
    /// Strongest first.
    pub const ALL: [JustificationLevel; 4] = [
        JustificationLevel::Primary,
        JustificationLevel::Empirical,
        JustificationLevel::Secondary,
        JustificationLevel::Observation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JustificationLevel::Primary => "primary",
            JustificationLevel::Empirical => "empirical",
            JustificationLevel::Secondary => "secondary",
            JustificationLevel::Observation => "observation",
        }
    }
}

impl fmt::Display for JustificationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown justification level `{0}` (expected primary, empirical, secondary or observation)")]
pub struct UnknownLevel(pub String);

impl FromStr for JustificationLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JustificationLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLevel(s.to_string()))
    }
}

/// True iff `a` is strictly stronger evidence than `b`.
pub fn justification_stronger(a: JustificationLevel, b: JustificationLevel) -> bool {
    a > b
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Justification {
    pub level: JustificationLevel,
    /// Free text naming the evidence, e.g. a data sheet or experiment id.
    pub source: String,
}

impl Justification {
    pub fn new(level: JustificationLevel, source: impl Into<String>) -> Self {
        Self {
            level,
            source: source.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeValue {
    pub value: String,
    pub justification: Justification,
}

impl AttributeValue {
    pub fn new(value: impl Into<String>, justification: Justification) -> Self {
        Self {
            value: value.into(),
            justification,
        }
    }
}

/// A named, justified fact about a port container.
///
/// On disk the value is flattened: `{"name", "value", "justification"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "AttributeRecord", into = "AttributeRecord")]
pub struct Attribute {
    pub name: String,
    pub value: AttributeValue,
}

impl Attribute {
    pub fn new(name: impl Into<String>, value: impl Into<String>, justification: Justification) -> Self {
        Self {
            name: name.into(),
            value: AttributeValue::new(value, justification),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeRecord {
    name: String,
    value: String,
    justification: Justification,
}

impl From<AttributeRecord> for Attribute {
    fn from(r: AttributeRecord) -> Self {
        Attribute {
            name: r.name,
            value: AttributeValue {
                value: r.value,
                justification: r.justification,
            },
        }
    }
}

impl From<Attribute> for AttributeRecord {
    fn from(a: Attribute) -> Self {
        AttributeRecord {
            name: a.name,
            value: a.value.value,
            justification: a.value.justification,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Input,
    Output,
}

impl Orientation {
    pub fn opposite(self) -> Orientation {
        match self {
            Orientation::Input => Orientation::Output,
            Orientation::Output => Orientation::Input,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Input => "input",
            Orientation::Output => "output",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Port {
    pub id: String,
    pub orientation: Orientation,
    /// Interface identifier. Compared for exact string equality.
    pub port_type: AttributeValue,
}

impl Port {
    pub fn new(id: impl Into<String>, orientation: Orientation, port_type: AttributeValue) -> Self {
        Self {
            id: id.into(),
            orientation,
            port_type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Product {
    pub id: String,
    pub display_name: String,
    pub manufacturer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_id: Option<String>,
    #[serde(default)]
    pub attributes: Vec<Attribute>,
    #[serde(default)]
    pub ports: Vec<Port>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSeries {
    pub id: String,
    pub display_name: String,
    #[serde(default)]
    pub attributes: Vec<Attribute>,
    #[serde(default)]
    pub ports: Vec<Port>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Compatible,
    Incompatible,
}

/// Where a claim applies: between connected neighbours, or anywhere in one
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Direct,
    Configuration,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimCondition {
    pub mediator: String,
}

/// Defeasible evidence about a pair of products or series.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatibilityClaim {
    pub polarity: Polarity,
    pub scope: Scope,
    /// Product ids or series ids. A series id covers every member.
    pub subjects: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ClaimCondition>,
    pub justification: Justification,
}

impl CompatibilityClaim {
    pub fn new(
        polarity: Polarity,
        scope: Scope,
        a: impl Into<String>,
        b: impl Into<String>,
        justification: Justification,
    ) -> Self {
        Self {
            polarity,
            scope,
            subjects: [a.into(), b.into()],
            condition: None,
            justification,
        }
    }

    pub fn with_mediator(mut self, mediator: impl Into<String>) -> Self {
        self.condition = Some(ClaimCondition {
            mediator: mediator.into(),
        });
        self
    }

    pub fn mediator(&self) -> Option<&str> {
        self.condition.as_ref().map(|c| c.mediator.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicationSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_effector_subtype: Option<String>,
}

/// Extra required-port class for a product type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortRule {
    pub product_type: String,
    pub port_type_class: String,
    pub members: Vec<String>,
}

/// The catalog file exactly as written on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDocument {
    pub format_version: u32,
    #[serde(default)]
    pub series: Vec<ProductSeries>,
    pub products: Vec<Product>,
    #[serde(default)]
    pub claims: Vec<CompatibilityClaim>,
    #[serde(default)]
    pub applications: Vec<ApplicationSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub port_rules: Vec<PortRule>,
}

impl CatalogDocument {
    pub fn new() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            series: Vec::new(),
            products: Vec::new(),
            claims: Vec::new(),
            applications: Vec::new(),
            port_rules: Vec::new(),
        }
    }
}

impl Default for CatalogDocument {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unresolved reference `{id}` in {context}")]
    Reference { id: String, context: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}

impl From<serde_json::Error> for CatalogError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let (line, column) = (e.line(), e.column());
        let message = e.to_string();
        match e.classify() {
            Category::Data => CatalogError::Schema { line, column, message },
            Category::Io | Category::Syntax | Category::Eof => CatalogError::Parse { line, column, message },
        }
    }
}

/// Where an effective attribute or port came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "series")]
pub enum Origin {
    Local,
    Series(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sourced<T> {
    pub item: T,
    pub origin: Origin,
}

/// A product after series inheritance has been applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolvedProduct {
    pub id: String,
    pub display_name: String,
    pub manufacturer: String,
    pub series_id: Option<String>,
    pub attributes: Vec<Sourced<Attribute>>,
    pub ports: Vec<Sourced<Port>>,
}

impl ResolvedProduct {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().map(|a| &a.item).find(|a| a.name == name)
    }

    pub fn attribute_value(&self, name: &str) -> Option<&str> {
        self.attribute(name).map(|a| a.value.value.as_str())
    }

    /// Value of the `type` attribute.
    pub fn product_type(&self) -> Option<&str> {
        self.attribute_value("type")
    }

    pub fn port(&self, id: &str) -> Option<&Port> {
        self.ports.iter().map(|p| &p.item).find(|p| p.id == id)
    }

    pub fn ports(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().map(|p| &p.item)
    }

    /// True if `subject` (a product or series id) designates this product.
    pub fn is_designated_by(&self, subject: &str) -> bool {
        self.id == subject || self.series_id.as_deref() == Some(subject)
    }
}

/// Applies series inheritance to one product.
///
/// Series attributes and ports are kept unless the product declares an
/// attribute with the same name or a port with the same id, in which case the
/// local one replaces it entirely. Applying it to its own output is a no-op.
pub fn inherit(product: &Product, series: Option<&ProductSeries>) -> Product {
    let mut out = product.clone();
    if let Some(series) = series {
        let mut attributes: Vec<Attribute> = series
            .attributes
            .iter()
            .filter(|a| !product.attributes.iter().any(|l| l.name == a.name))
            .cloned()
            .collect();
        attributes.extend(product.attributes.iter().cloned());
        let mut ports: Vec<Port> = series
            .ports
            .iter()
            .filter(|p| !product.ports.iter().any(|l| l.id == p.id))
            .cloned()
            .collect();
        ports.extend(product.ports.iter().cloned());
        out.attributes = attributes;
        out.ports = ports;
    }
    out
}

fn resolve_product(product: &Product, series: Option<&ProductSeries>) -> ResolvedProduct {
    let origin_of = |inherited: bool| match (inherited, series) {
        (true, Some(s)) => Origin::Series(s.id.clone()),
        _ => Origin::Local,
    };
    let flat = inherit(product, series);
    let attributes = flat
        .attributes
        .into_iter()
        .map(|a| {
            let inherited = !product.attributes.iter().any(|l| l.name == a.name);
            Sourced {
                item: a,
                origin: origin_of(inherited),
            }
        })
        .collect();
    let ports = flat
        .ports
        .into_iter()
        .map(|p| {
            let inherited = !product.ports.iter().any(|l| l.id == p.id);
            Sourced {
                item: p,
                origin: origin_of(inherited),
            }
        })
        .collect();
    ResolvedProduct {
        id: product.id.clone(),
        display_name: product.display_name.clone(),
        manufacturer: product.manufacturer.clone(),
        series_id: product.series_id.clone(),
        attributes,
        ports,
    }
}

/// A loaded catalog with all references checked and inheritance applied.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct Catalog {
    document: CatalogDocument,
    products: Vec<ResolvedProduct>,
    product_index: HashMap<String, usize>,
    series_index: HashMap<String, usize>,
    fingerprint: String,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.document == other.document
    }
}

impl Catalog {
    pub fn from_document(document: CatalogDocument) -> Result<Catalog, CatalogError> {
        if document.format_version != FORMAT_VERSION {
            return Err(CatalogError::Schema {
                line: 0,
                column: 0,
                message: format!(
                    "unsupported format_version {} (expected {FORMAT_VERSION})",
                    document.format_version
                ),
            });
        }

        let mut series_index = HashMap::new();
        for (i, s) in document.series.iter().enumerate() {
            if series_index.insert(s.id.clone(), i).is_some() {
                return Err(CatalogError::DuplicateId(s.id.clone()));
            }
        }
        let mut product_index = HashMap::new();
        for (i, p) in document.products.iter().enumerate() {
            if series_index.contains_key(&p.id) || product_index.insert(p.id.clone(), i).is_some() {
                return Err(CatalogError::DuplicateId(p.id.clone()));
            }
        }

        for p in &document.products {
            if let Some(sid) = &p.series_id {
                if !series_index.contains_key(sid) {
                    return Err(CatalogError::Reference {
                        id: sid.clone(),
                        context: format!("series_id of product `{}`", p.id),
                    });
                }
            }
        }
        for (i, claim) in document.claims.iter().enumerate() {
            for s in &claim.subjects {
                if !product_index.contains_key(s) && !series_index.contains_key(s) {
                    return Err(CatalogError::Reference {
                        id: s.clone(),
                        context: format!("subjects of claim #{i}"),
                    });
                }
            }
            if let Some(m) = claim.mediator() {
                if !product_index.contains_key(m) {
                    return Err(CatalogError::Reference {
                        id: m.to_string(),
                        context: format!("mediator of claim #{i}"),
                    });
                }
            }
        }

        let products = document
            .products
            .iter()
            .map(|p| {
                let series = p.series_id.as_ref().map(|sid| &document.series[series_index[sid]]);
                resolve_product(p, series)
            })
            .collect();

        let canonical = serde_json::to_vec(&document).expect("catalog document serializes");
        let digest = Sha256::digest(&canonical);
        let fingerprint = digest.iter().map(|b| format!("{b:02x}")).collect();

        Ok(Catalog {
            document,
            products,
            product_index,
            series_index,
            fingerprint,
        })
    }

    pub fn document(&self) -> &CatalogDocument {
        &self.document
    }

    /// Effective products, in file order.
    pub fn products(&self) -> &[ResolvedProduct] {
        &self.products
    }

    pub fn product(&self, id: &str) -> Option<&ResolvedProduct> {
        self.product_index.get(id).map(|&i| &self.products[i])
    }

    pub fn series(&self, id: &str) -> Option<&ProductSeries> {
        self.series_index.get(id).map(|&i| &self.document.series[i])
    }

    pub fn claims(&self) -> &[CompatibilityClaim] {
        &self.document.claims
    }

    pub fn applications(&self) -> &[ApplicationSpec] {
        &self.document.applications
    }

    pub fn application(&self, name: &str) -> Option<&ApplicationSpec> {
        self.document.applications.iter().find(|a| a.name == name)
    }

    pub fn port_rules(&self) -> &[PortRule] {
        &self.document.port_rules
    }

    /// SHA-256 of the canonical serialization; changes whenever content does.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.document).expect("catalog document serializes")
    }
}

pub fn parse_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let document: CatalogDocument = serde_json::from_str(text)?;
    Catalog::from_document(document)
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_catalog(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    MissingType,
    MultipleTypes,
    UnknownType,
    MissingSubtype,
    NoPorts,
    DuplicateAttribute,
    DuplicatePort,
    EmptyValue,
    EmptySource,
    SubjectsNotDistinct,
    ConditionNotAllowed,
    DuplicateApplication,
    SubtypeOnAny,
    MissingRequiredPort,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::MissingType => "missing_type",
            DiagnosticCode::MultipleTypes => "multiple_types",
            DiagnosticCode::UnknownType => "unknown_type",
            DiagnosticCode::MissingSubtype => "missing_subtype",
            DiagnosticCode::NoPorts => "no_ports",
            DiagnosticCode::DuplicateAttribute => "duplicate_attribute",
            DiagnosticCode::DuplicatePort => "duplicate_port",
            DiagnosticCode::EmptyValue => "empty_value",
            DiagnosticCode::EmptySource => "empty_source",
            DiagnosticCode::SubjectsNotDistinct => "subjects_not_distinct",
            DiagnosticCode::ConditionNotAllowed => "condition_not_allowed",
            DiagnosticCode::DuplicateApplication => "duplicate_application",
            DiagnosticCode::SubtypeOnAny => "subtype_on_any",
            DiagnosticCode::MissingRequiredPort => "missing_required_port",
        }
    }
}

/// One violated catalog invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    /// Id of the offending product, series, claim (`claim#N`) or application.
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.subject, self.code.as_str(), self.message)
    }
}

fn check_justification(j: &Justification, owner: &str, what: &str, out: &mut Vec<Diagnostic>) {
    if j.source.trim().is_empty() {
        out.push(Diagnostic::new(
            DiagnosticCode::EmptySource,
            owner,
            format!("justification of {what} has an empty source"),
        ));
    }
}

fn check_container(owner: &str, attributes: &[Attribute], ports: &[Port], out: &mut Vec<Diagnostic>) {
    let mut names = BTreeSet::new();
    for a in attributes {
        if !names.insert(a.name.as_str()) {
            out.push(Diagnostic::new(
                DiagnosticCode::DuplicateAttribute,
                owner,
                format!("attribute `{}` declared more than once", a.name),
            ));
        }
        if a.value.value.trim().is_empty() {
            out.push(Diagnostic::new(
                DiagnosticCode::EmptyValue,
                owner,
                format!("attribute `{}` has an empty value", a.name),
            ));
        }
        check_justification(&a.value.justification, owner, &format!("attribute `{}`", a.name), out);
    }
    let mut ids = BTreeSet::new();
    for p in ports {
        if !ids.insert(p.id.as_str()) {
            out.push(Diagnostic::new(
                DiagnosticCode::DuplicatePort,
                owner,
                format!("port `{}` declared more than once", p.id),
            ));
        }
        if p.port_type.value.trim().is_empty() {
            out.push(Diagnostic::new(
                DiagnosticCode::EmptyValue,
                owner,
                format!("port `{}` has an empty port type", p.id),
            ));
        }
        check_justification(&p.port_type.justification, owner, &format!("port `{}`", p.id), out);
    }
}

/// Lists every broken catalog invariant; empty means the catalog is sound.
///
/// Checks run on effective products, so a member that inherits its ports
/// from a series is not reported as port-less.
pub fn validate_catalog(catalog: &Catalog) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for s in &catalog.document.series {
        check_container(&s.id, &s.attributes, &s.ports, &mut out);
        if s.ports.is_empty() {
            out.push(Diagnostic::new(
                DiagnosticCode::NoPorts,
                &s.id,
                "a product series must share at least one port",
            ));
        }
    }

    for (raw, product) in catalog.document.products.iter().zip(&catalog.products) {
        let id = product.id.as_str();
        check_container(id, &raw.attributes, &raw.ports, &mut out);
        if product.ports.is_empty() {
            out.push(Diagnostic::new(
                DiagnosticCode::NoPorts,
                id,
                "a product must have at least one port",
            ));
        }
        let types: Vec<&str> = product
            .attributes
            .iter()
            .filter(|a| a.item.name == "type")
            .map(|a| a.item.value.value.as_str())
            .collect();
        match types.as_slice() {
            [] => out.push(Diagnostic::new(
                DiagnosticCode::MissingType,
                id,
                "product has no `type` attribute",
            )),
            [t] => {
                if !KNOWN_PRODUCT_TYPES.contains(t) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::UnknownType,
                        id,
                        format!("product type `{t}` is not one of {}", KNOWN_PRODUCT_TYPES.join(", ")),
                    ));
                }
                if *t == "end_effector" && product.attribute("subtype").is_none() {
                    out.push(Diagnostic::new(
                        DiagnosticCode::MissingSubtype,
                        id,
                        "end effector has no `subtype` attribute",
                    ));
                }
            }
            _ => out.push(Diagnostic::new(
                DiagnosticCode::MultipleTypes,
                id,
                "product has more than one `type` attribute",
            )),
        }
        out.extend(crate::reasoning::required_ports_check(catalog, product));
    }

    for (i, claim) in catalog.document.claims.iter().enumerate() {
        let subject = format!("claim#{i}");
        if claim.subjects[0] == claim.subjects[1] {
            out.push(Diagnostic::new(
                DiagnosticCode::SubjectsNotDistinct,
                &subject,
                format!("subjects must be distinct (both are `{}`)", claim.subjects[0]),
            ));
        }
        if claim.condition.is_some() && claim.scope != Scope::Direct {
            out.push(Diagnostic::new(
                DiagnosticCode::ConditionNotAllowed,
                &subject,
                "a mediator condition is only allowed on direct-scope claims",
            ));
        }
        if let Some(m) = claim.mediator() {
            if claim.subjects.iter().any(|s| s == m) {
                out.push(Diagnostic::new(
                    DiagnosticCode::ConditionNotAllowed,
                    &subject,
                    format!("mediator `{m}` is also a subject"),
                ));
            }
        }
        check_justification(&claim.justification, &subject, "claim", &mut out);
    }

    let mut app_names: BTreeMap<&str, usize> = BTreeMap::new();
    for app in &catalog.document.applications {
        *app_names.entry(app.name.as_str()).or_default() += 1;
        if app.name == "any" && app.end_effector_subtype.is_some() {
            out.push(Diagnostic::new(
                DiagnosticCode::SubtypeOnAny,
                &app.name,
                "application `any` must not require an end effector subtype",
            ));
        }
    }
    for (name, count) in app_names {
        if count > 1 {
            out.push(Diagnostic::new(
                DiagnosticCode::DuplicateApplication,
                name,
                format!("application declared {count} times"),
            ));
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primary(src: &str) -> Justification {
        Justification::new(JustificationLevel::Primary, src)
    }

    fn port(id: &str, o: Orientation, ty: &str) -> Port {
        Port::new(id, o, AttributeValue::new(ty, primary("ds")))
    }

    fn product(id: &str, ty: &str, ports: Vec<Port>) -> Product {
        Product {
            id: id.into(),
            display_name: id.to_uppercase(),
            manufacturer: "acme".into(),
            series_id: None,
            attributes: vec![Attribute::new("type", ty, primary("ds"))],
            ports,
        }
    }

    #[test]
    fn justification_order() {
        use JustificationLevel::*;
        assert!(justification_stronger(Primary, Observation));
        assert!(!justification_stronger(Empirical, Empirical));
        assert!(!justification_stronger(Secondary, Empirical));
        assert!(justification_stronger(Empirical, Secondary));
        let mut sorted = JustificationLevel::ALL.to_vec();
        sorted.sort();
        assert_eq!(sorted, vec![Observation, Secondary, Empirical, Primary]);
        assert_eq!("empirical".parse::<JustificationLevel>().unwrap(), Empirical);
        assert!("strong".parse::<JustificationLevel>().is_err());
    }

    #[test]
    fn minimal_catalog_loads() {
        let text = r#"{
            "format_version": 1,
            "products": [{
                "id": "g1", "display_name": "Gripper", "manufacturer": "acme",
                "attributes": [
                    {"name": "type", "value": "end_effector", "justification": {"level": "primary", "source": "ds-1"}},
                    {"name": "subtype", "value": "gripper", "justification": {"level": "primary", "source": "ds-1"}}
                ],
                "ports": [{"id": "mech", "orientation": "input",
                           "port_type": {"value": "tool_a", "justification": {"level": "primary", "source": "ds-1"}}}]
            }]
        }"#;
        let c = parse_catalog(text).unwrap();
        assert_eq!(c.products().len(), 1);
        assert!(validate_catalog(&c).is_empty());
    }

    #[test]
    fn dangling_claim_subject_is_reference_error() {
        let mut doc = CatalogDocument::new();
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        doc.claims.push(CompatibilityClaim::new(
            Polarity::Incompatible,
            Scope::Direct,
            "a",
            "X",
            primary("ds"),
        ));
        match Catalog::from_document(doc) {
            Err(CatalogError::Reference { id, .. }) => assert_eq!(id, "X"),
            other => panic!("expected reference error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_mediator_and_series_are_reference_errors() {
        let mut doc = CatalogDocument::new();
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        doc.products
            .push(product("b", "eecd", vec![port("p", Orientation::Input, "t")]));
        doc.claims.push(
            CompatibilityClaim::new(Polarity::Incompatible, Scope::Direct, "a", "b", primary("ds"))
                .with_mediator("nope"),
        );
        assert!(matches!(
            Catalog::from_document(doc.clone()),
            Err(CatalogError::Reference { id, .. }) if id == "nope"
        ));
        doc.claims.clear();
        doc.products[0].series_id = Some("ghost".into());
        assert!(matches!(
            Catalog::from_document(doc),
            Err(CatalogError::Reference { id, .. }) if id == "ghost"
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut doc = CatalogDocument::new();
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        assert!(matches!(Catalog::from_document(doc), Err(CatalogError::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn syntax_and_schema_errors_are_distinguished() {
        match parse_catalog("{\n  \"format_version\": 1,\n  \"products\": [,]\n}") {
            Err(CatalogError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_catalog(r#"{"format_version": 1}"#),
            Err(CatalogError::Schema { .. })
        ));
        // strict mode: unknown top-level key
        assert!(matches!(
            parse_catalog(r#"{"format_version": 1, "products": [], "prodcuts": []}"#),
            Err(CatalogError::Schema { .. })
        ));
        assert!(matches!(
            parse_catalog(r#"{"format_version": 2, "products": []}"#),
            Err(CatalogError::Schema { .. })
        ));
    }

    #[test]
    fn port_without_valid_orientation_is_schema_error() {
        let text = r#"{"format_version": 1, "products": [{
            "id": "a", "display_name": "A", "manufacturer": "m",
            "ports": [{"id": "p", "orientation": "neutral",
                       "port_type": {"value": "t", "justification": {"level": "primary", "source": "s"}}}]}]}"#;
        assert!(matches!(parse_catalog(text), Err(CatalogError::Schema { .. })));
    }

    #[test]
    fn series_inheritance_and_override() {
        let series = ProductSeries {
            id: "S".into(),
            display_name: "Series".into(),
            attributes: vec![
                Attribute::new("type", "robotic_arm", primary("series-ds")),
                Attribute::new("payload", "5kg", primary("series-ds")),
            ],
            ports: vec![port("robot_flange", Orientation::Output, "robot_flange_iso50")],
        };
        let mut member = product("arm1", "robotic_arm", vec![]);
        member.attributes = vec![Attribute::new("payload", "7kg", primary("arm1-ds"))];
        member.series_id = Some("S".into());

        let mut doc = CatalogDocument::new();
        doc.series.push(series.clone());
        doc.products.push(member.clone());
        let c = Catalog::from_document(doc).unwrap();
        let p = c.product("arm1").unwrap();
        assert!(p.port("robot_flange").is_some());
        assert_eq!(p.ports[0].origin, Origin::Series("S".into()));
        assert_eq!(p.attribute_value("payload"), Some("7kg"));
        assert_eq!(p.product_type(), Some("robotic_arm"));
        let payload = p.attributes.iter().find(|a| a.item.name == "payload").unwrap();
        assert_eq!(payload.origin, Origin::Local);
        assert!(validate_catalog(&c).is_empty(), "{:?}", validate_catalog(&c));

        let once = inherit(&member, Some(&series));
        assert_eq!(inherit(&once, Some(&series)), once);
    }

    #[test]
    fn validation_diagnostics() {
        let mut doc = CatalogDocument::new();
        let mut untyped = product("u", "eecd", vec![port("p", Orientation::Input, "t")]);
        untyped.attributes.clear();
        doc.products.push(untyped);
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        let c = Catalog::from_document(doc.clone()).unwrap();
        let d = validate_catalog(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::MissingType);
        assert_eq!(d[0].subject, "u");

        doc.products.remove(0);
        doc.claims.push(CompatibilityClaim::new(
            Polarity::Compatible,
            Scope::Direct,
            "a",
            "a",
            primary("ds"),
        ));
        let d = validate_catalog(&Catalog::from_document(doc.clone()).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::SubjectsNotDistinct);
        assert!(d[0].message.contains("subjects must be distinct"));

        doc.claims.clear();
        doc.products.push(product("x", "teleporter", vec![]));
        doc.applications.push(ApplicationSpec {
            name: "any".into(),
            end_effector_subtype: Some("gripper".into()),
        });
        let codes: Vec<_> = validate_catalog(&Catalog::from_document(doc).unwrap())
            .into_iter()
            .map(|d| d.code)
            .collect();
        assert!(codes.contains(&DiagnosticCode::NoPorts));
        assert!(codes.contains(&DiagnosticCode::UnknownType));
        assert!(codes.contains(&DiagnosticCode::SubtypeOnAny));
    }

    #[test]
    fn conditioned_configuration_claim_is_flagged() {
        let mut doc = CatalogDocument::new();
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        doc.products
            .push(product("b", "eecd", vec![port("p", Orientation::Input, "t")]));
        doc.products.push(product(
            "m",
            "data_connection",
            vec![port("p", Orientation::Input, "t")],
        ));
        doc.claims.push(
            CompatibilityClaim::new(Polarity::Incompatible, Scope::Configuration, "a", "b", primary("ds"))
                .with_mediator("m"),
        );
        let d = validate_catalog(&Catalog::from_document(doc).unwrap());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::ConditionNotAllowed);
    }

    #[test]
    fn fingerprint_tracks_content() {
        let mut doc = CatalogDocument::new();
        doc.products
            .push(product("a", "eecd", vec![port("p", Orientation::Input, "t")]));
        let a = Catalog::from_document(doc.clone()).unwrap();
        let b = Catalog::from_document(doc.clone()).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        doc.products[0].display_name = "changed".into();
        let c = Catalog::from_document(doc).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
