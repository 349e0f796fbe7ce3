//! Search-space configurations: type domains, class and association bounds,
//! attribute domains, invariant flags and bitwidth. Several named
//! configurations live in one file.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::path::PathBuf;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::location::SourceLocation;
use crate::model::Model;
use crate::ocl::{format_real, write_string_literal, OclType};

/// Upper end of a bound; `Default` is written `*` and resolves to
/// `default_upper`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMax {
    Value(u32),
    Default,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub min: u32,
    pub max: BoundMax,
}

impl Bound {
    pub const fn exactly(n: u32) -> Self {
        Bound {
            min: n,
            max: BoundMax::Value(n),
        }
    }

    pub const fn between(min: u32, max: u32) -> Self {
        Bound {
            min,
            max: BoundMax::Value(max),
        }
    }

    pub const fn open() -> Self {
        Bound {
            min: 0,
            max: BoundMax::Default,
        }
    }

    pub fn resolve_max(&self, default_upper: u32) -> u32 {
        match self.max {
            BoundMax::Value(v) => v,
            BoundMax::Default => default_upper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum DomainValue {
    Integer(i64),
    Real(f64),
    String(String),
    Boolean(bool),
}

impl DomainValue {
    pub fn matches(&self, ty: &OclType) -> bool {
        matches!(
            (self, ty),
            (DomainValue::Integer(_), OclType::Integer)
                | (DomainValue::Real(_), OclType::Real)
                | (DomainValue::Integer(_), OclType::Real)
                | (DomainValue::String(_), OclType::String)
                | (DomainValue::Boolean(_), OclType::Boolean)
        )
    }
}

impl fmt::Display for DomainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainValue::Integer(v) => write!(f, "{v}"),
            DomainValue::Real(v) => f.write_str(&format_real(*v)),
            DomainValue::String(s) => write_string_literal(f, s),
            DomainValue::Boolean(b) => write!(f, "{b}"),
        }
    }
}

/// Values allowed for one attribute, overriding the type-wide domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeDomain {
    Values(Vec<DomainValue>),
    /// Integer subrange; a missing end falls back to the Integer domain.
    Range { min: Option<i64>, max: Option<i64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantFlag {
    Active,
    Inactive,
    Negated,
}

impl InvariantFlag {
    pub fn keyword(self) -> &'static str {
        match self {
            InvariantFlag::Active => "active",
            InvariantFlag::Inactive => "inactive",
            InvariantFlag::Negated => "negated",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "active" => Some(InvariantFlag::Active),
            "inactive" => Some(InvariantFlag::Inactive),
            "negated" => Some(InvariantFlag::Negated),
            _ => None,
        }
    }
}

/// A link that must be present in every generated state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredLink {
    pub association: String,
    pub ends: [String; 2],
}

/// Source positions of configuration keys; never part of equality.
#[derive(Clone, Debug, Default)]
pub struct KeyLocations(pub BTreeMap<String, SourceLocation>);

impl PartialEq for KeyLocations {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub integer_min: i64,
    pub integer_max: i64,
    pub string_count: u32,
    pub string_values: Option<Vec<String>>,
    pub real_values: Option<Vec<f64>>,
    pub class_bounds: BTreeMap<String, Bound>,
    pub association_bounds: BTreeMap<String, Bound>,
    /// class → attribute → domain
    pub attribute_domains: BTreeMap<String, BTreeMap<String, AttributeDomain>>,
    /// qualified invariant name (`Class::name`) → flag; missing means active
    pub invariant_flags: BTreeMap<String, InvariantFlag>,
    pub bitwidth: u32,
    pub required_links: Vec<RequiredLink>,
    pub default_upper: u32,
    #[serde(skip)]
    pub locations: KeyLocations,
}

pub const DEFAULT_INTEGER_MIN: i64 = -10;
pub const DEFAULT_INTEGER_MAX: i64 = 10;
pub const DEFAULT_STRING_COUNT: u32 = 10;
pub const DEFAULT_BITWIDTH: u32 = 8;
pub const DEFAULT_UPPER: u32 = 10;
pub const MAX_BITWIDTH: u32 = 63;
const DEFAULT_REALS: [f64; 3] = [0.0, 0.5, 1.0];

impl Default for Configuration {
    fn default() -> Self {
        Configuration {
            integer_min: DEFAULT_INTEGER_MIN,
            integer_max: DEFAULT_INTEGER_MAX,
            string_count: DEFAULT_STRING_COUNT,
            string_values: None,
            real_values: None,
            class_bounds: BTreeMap::new(),
            association_bounds: BTreeMap::new(),
            attribute_domains: BTreeMap::new(),
            invariant_flags: BTreeMap::new(),
            bitwidth: DEFAULT_BITWIDTH,
            required_links: Vec::new(),
            default_upper: DEFAULT_UPPER,
            locations: KeyLocations::default(),
        }
    }
}

impl Configuration {
    pub fn class_bound(&self, class: &str) -> Bound {
        self.class_bounds.get(class).copied().unwrap_or(Bound::open())
    }

    pub fn association_bound(&self, assoc: &str) -> Bound {
        self.association_bounds
            .get(assoc)
            .copied()
            .unwrap_or(Bound::open())
    }

    pub fn flag(&self, qualified_invariant: &str) -> InvariantFlag {
        self.invariant_flags
            .get(qualified_invariant)
            .copied()
            .unwrap_or(InvariantFlag::Active)
    }

    /// The auto-generated or explicit String domain.
    pub fn strings(&self) -> Vec<String> {
        match &self.string_values {
            Some(v) => v.clone(),
            None => (1..=self.string_count).map(|i| format!("string{i}")).collect(),
        }
    }

    /// Domain override for attribute `attr` of objects of class `class`,
    /// looking through `class` and then its superclasses.
    pub fn attribute_domain<'a>(
        &'a self,
        model: &Model,
        class: &str,
        attr: &str,
    ) -> Option<&'a AttributeDomain> {
        model
            .ancestors(class)
            .into_iter()
            .find_map(|c| self.attribute_domains.get(c).and_then(|m| m.get(attr)))
    }

    pub fn location_of(&self, key: &str) -> Option<SourceLocation> {
        self.locations.0.get(key).cloned()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    InvalidValue,
    DuplicateKey,
    DuplicateConfig,
    UnknownClass,
    UnknownAssociation,
    UnknownAttribute,
    UnknownInvariant,
    AbstractClassBound,
    MinExceedsMax,
    InvalidBitwidth,
    DomainTypeMismatch,
    EmptyDomain,
}

/// A problem with one configuration key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{}{message}", location.as_ref().map(|l| format!("{l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    /// Key the error is about, e.g. `Customer_min`.
    pub key: String,
    pub message: String,
    pub location: Option<SourceLocation>,
    /// Name of the configuration the key belongs to, when known.
    pub config: Option<String>,
}

impl ConfigError {
    pub fn new(kind: ConfigErrorKind, key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            kind,
            key: key.into(),
            message: message.into(),
            location: None,
            config: None,
        }
    }
}

/// Checks a configuration against the model. Returns every problem found.
pub fn validate(config: &Configuration, model: &Model) -> Vec<ConfigError> {
    let mut errs = Vec::new();
    let mut push = |kind, key: String, message: String| {
        let location = config.location_of(&key);
        errs.push(ConfigError {
            kind,
            key,
            message,
            location,
            config: None,
        });
    };

    if config.integer_min > config.integer_max {
        push(
            ConfigErrorKind::MinExceedsMax,
            "Integer_min".into(),
            format!(
                "`Integer_min` ({}) exceeds `Integer_max` ({})",
                config.integer_min, config.integer_max
            ),
        );
    }
    if config.bitwidth == 0 || config.bitwidth > MAX_BITWIDTH {
        push(
            ConfigErrorKind::InvalidBitwidth,
            "bitwidth".into(),
            format!("`bitwidth` must be between 1 and {MAX_BITWIDTH}, found {}", config.bitwidth),
        );
    }
    for (class, bound) in &config.class_bounds {
        let key = format!("{class}_min");
        match model.class(class) {
            None => push(
                ConfigErrorKind::UnknownClass,
                key,
                format!("`{class}` is not a class of the model"),
            ),
            Some(c) if c.is_abstract => push(
                ConfigErrorKind::AbstractClassBound,
                key,
                format!("class `{class}` is abstract and cannot be given bounds"),
            ),
            Some(_) => {
                let max = bound.resolve_max(config.default_upper);
                if bound.min > max {
                    push(
                        ConfigErrorKind::MinExceedsMax,
                        key,
                        format!("`{class}_min` ({}) exceeds `{class}_max` ({max})", bound.min),
                    );
                }
            }
        }
    }
    for (assoc, bound) in &config.association_bounds {
        let key = format!("{assoc}_min");
        if model.association(assoc).is_none() {
            push(
                ConfigErrorKind::UnknownAssociation,
                key,
                format!("`{assoc}` is not an association of the model"),
            );
            continue;
        }
        let max = bound.resolve_max(config.default_upper);
        if bound.min > max {
            push(
                ConfigErrorKind::MinExceedsMax,
                key,
                format!("`{assoc}_min` ({}) exceeds `{assoc}_max` ({max})", bound.min),
            );
        }
    }
    for (class, attrs) in &config.attribute_domains {
        for (attr, domain) in attrs {
            let key = match domain {
                AttributeDomain::Values(_) => format!("{class}_{attr}"),
                AttributeDomain::Range { .. } => format!("{class}_{attr}_min"),
            };
            if model.class(class).is_none() {
                push(
                    ConfigErrorKind::UnknownClass,
                    key,
                    format!("`{class}` is not a class of the model"),
                );
                continue;
            }
            let Some((_, a)) = model.attribute(class, attr) else {
                push(
                    ConfigErrorKind::UnknownAttribute,
                    key,
                    format!("class `{class}` has no attribute `{attr}`"),
                );
                continue;
            };
            match domain {
                AttributeDomain::Values(values) => {
                    if let Some(v) = values.iter().find(|v| !v.matches(&a.ty)) {
                        push(
                            ConfigErrorKind::DomainTypeMismatch,
                            key,
                            format!("value {v} does not match attribute type `{}`", a.ty),
                        );
                    }
                }
                AttributeDomain::Range { min, max } => {
                    if a.ty != OclType::Integer {
                        push(
                            ConfigErrorKind::DomainTypeMismatch,
                            key,
                            format!("range domains need an Integer attribute, `{class}::{attr}` is `{}`", a.ty),
                        );
                    } else {
                        let lo = min.unwrap_or(config.integer_min);
                        let hi = max.unwrap_or(config.integer_max);
                        if lo > hi {
                            push(
                                ConfigErrorKind::MinExceedsMax,
                                key,
                                format!("`{class}_{attr}_min` ({lo}) exceeds `{class}_{attr}_max` ({hi})"),
                            );
                        }
                    }
                }
            }
        }
    }
    for name in config.invariant_flags.keys() {
        if model.invariant(name).is_none() {
            push(
                ConfigErrorKind::UnknownInvariant,
                format!("inv::{name}"),
                format!("the model has no invariant `{name}`"),
            );
        }
    }
    for link in &config.required_links {
        if model.association(&link.association).is_none() {
            push(
                ConfigErrorKind::UnknownAssociation,
                format!("link::{}", link.association),
                format!("`{}` is not an association of the model", link.association),
            );
        }
    }
    // Every attribute slot that may be instantiated needs a nonempty domain.
    for c in model.classes.iter().filter(|c| !c.is_abstract) {
        if config.class_bound(&c.name).resolve_max(config.default_upper) == 0 {
            continue;
        }
        for (decl, a) in model.all_attributes(&c.name) {
            let empty = match config.attribute_domain(model, &c.name, &a.name) {
                Some(AttributeDomain::Values(v)) => v.is_empty(),
                Some(AttributeDomain::Range { .. }) => false,
                None => match a.ty {
                    OclType::String => config.strings().is_empty(),
                    OclType::Real => config.real_values.as_ref().is_none_or(|v| v.is_empty()),
                    _ => false,
                },
            };
            if empty {
                let key = match a.ty {
                    OclType::String => "String_values".to_string(),
                    OclType::Real => "Real_values".to_string(),
                    _ => format!("{decl}_{}", a.name),
                };
                push(
                    ConfigErrorKind::EmptyDomain,
                    key,
                    format!(
                        "attribute `{decl}::{}` of class `{}` has no values to choose from",
                        a.name, c.name
                    ),
                );
            }
        }
    }
    errs.sort_by(|a, b| a.key.cmp(&b.key).then(a.message.cmp(&b.message)));
    errs.dedup();
    errs
}

/// Configuration admitting every concrete class and association up to the
/// default upper bound, with all invariants active.
pub fn default_config(model: &Model) -> Configuration {
    let mut config = Configuration::default();
    for c in model.classes.iter().filter(|c| !c.is_abstract) {
        config.class_bounds.insert(c.name.clone(), Bound::open());
    }
    for a in &model.associations {
        config.association_bounds.insert(a.name.clone(), Bound::open());
    }
    for inv in &model.invariants {
        config
            .invariant_flags
            .insert(inv.qualified_name(), InvariantFlag::Active);
    }
    let has_reals = model
        .classes
        .iter()
        .flat_map(|c| &c.attributes)
        .any(|a| a.ty == OclType::Real);
    if has_reals {
        config.real_values = Some(DEFAULT_REALS.to_vec());
    }
    config
}

/// An ordered set of named configurations, as stored in one file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub path: Option<PathBuf>,
    pub configs: IndexMap<String, Configuration>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigFileError {
    #[error("no configuration named `{0}`")]
    UnknownConfig(String),
    #[error("a configuration named `{0}` already exists")]
    DuplicateName(String),
    #[error("configuration names must not be empty or contain `[`, `]` or line breaks")]
    InvalidName(String),
}

fn check_name(name: &str) -> Result<(), ConfigFileError> {
    if name.trim().is_empty() || name.trim() != name || name.contains(['[', ']', '\n', '\r']) {
        Err(ConfigFileError::InvalidName(name.to_string()))
    } else {
        Ok(())
    }
}

impl ConfigFile {
    pub fn names(&self) -> Vec<&str> {
        self.configs.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Configuration> {
        self.configs.get(name)
    }

    /// Deep-copies configuration `name` right after itself. Without
    /// `new_name` the copy is called `<name> (copy)`.
    pub fn clone_config(&self, name: &str, new_name: Option<&str>) -> Result<ConfigFile, ConfigFileError> {
        let idx = self
            .configs
            .get_index_of(name)
            .ok_or_else(|| ConfigFileError::UnknownConfig(name.to_string()))?;
        let target = match new_name {
            Some(n) => n.to_string(),
            None => {
                let mut candidate = format!("{name} (copy)");
                let mut k = 2;
                while self.configs.contains_key(&candidate) {
                    candidate = format!("{name} (copy {k})");
                    k += 1;
                }
                candidate
            }
        };
        check_name(&target)?;
        if self.configs.contains_key(&target) {
            return Err(ConfigFileError::DuplicateName(target));
        }
        let mut out = self.clone();
        let copy = self.configs[idx].clone();
        out.configs.shift_insert(idx + 1, target, copy);
        Ok(out)
    }

    pub fn rename_config(&self, name: &str, new_name: &str) -> Result<ConfigFile, ConfigFileError> {
        let idx = self
            .configs
            .get_index_of(name)
            .ok_or_else(|| ConfigFileError::UnknownConfig(name.to_string()))?;
        check_name(new_name)?;
        if name == new_name {
            return Ok(self.clone());
        }
        if self.configs.contains_key(new_name) {
            return Err(ConfigFileError::DuplicateName(new_name.to_string()));
        }
        let mut out = self.clone();
        let config = out.configs.shift_remove(name).expect("present");
        out.configs.shift_insert(idx, new_name.to_string(), config);
        Ok(out)
    }

    pub fn delete_config(&self, name: &str) -> Result<ConfigFile, ConfigFileError> {
        if !self.configs.contains_key(name) {
            return Err(ConfigFileError::UnknownConfig(name.to_string()));
        }
        let mut out = self.clone();
        out.configs.shift_remove(name);
        Ok(out)
    }

    /// Inserts or replaces a configuration, keeping its position if present.
    pub fn with_config(&self, name: &str, config: Configuration) -> Result<ConfigFile, ConfigFileError> {
        check_name(name)?;
        let mut out = self.clone();
        out.configs.insert(name.to_string(), config);
        Ok(out)
    }
}

fn write_set<T>(out: &mut String, items: &[T], mut each: impl FnMut(&mut String, &T)) {
    out.push('{');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        each(out, item);
    }
    out.push('}');
}

fn write_max(max: BoundMax) -> String {
    match max {
        BoundMax::Value(v) => v.to_string(),
        BoundMax::Default => "*".to_string(),
    }
}

/// Writes the body (without section header) of one configuration.
pub fn serialize_config(config: &Configuration) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Integer_min = {}", config.integer_min);
    let _ = writeln!(out, "Integer_max = {}", config.integer_max);
    let _ = writeln!(out, "String_count = {}", config.string_count);
    if let Some(values) = &config.string_values {
        out.push_str("String_values = ");
        write_set(&mut out, values, |o, s| {
            let _ = write_string_literal(o, s);
        });
        out.push('\n');
    }
    if let Some(values) = &config.real_values {
        out.push_str("Real_values = ");
        write_set(&mut out, values, |o, v| o.push_str(&format_real(*v)));
        out.push('\n');
    }
    let _ = writeln!(out, "bitwidth = {}", config.bitwidth);
    let _ = writeln!(out, "default_upper = {}", config.default_upper);
    for (name, b) in config.class_bounds.iter().chain(&config.association_bounds) {
        let _ = writeln!(out, "{name}_min = {}", b.min);
        let _ = writeln!(out, "{name}_max = {}", write_max(b.max));
    }
    for (class, attrs) in &config.attribute_domains {
        for (attr, domain) in attrs {
            match domain {
                AttributeDomain::Values(values) => {
                    let _ = write!(out, "{class}_{attr} = ");
                    write_set(&mut out, values, |o, v| {
                        let _ = write!(o, "{v}");
                    });
                    out.push('\n');
                }
                AttributeDomain::Range { min, max } => {
                    if let Some(v) = min {
                        let _ = writeln!(out, "{class}_{attr}_min = {v}");
                    }
                    if let Some(v) = max {
                        let _ = writeln!(out, "{class}_{attr}_max = {v}");
                    }
                }
            }
        }
    }
    for (name, flag) in &config.invariant_flags {
        let _ = writeln!(out, "inv::{name} = {}", flag.keyword());
    }
    for link in &config.required_links {
        let _ = writeln!(
            out,
            "link::{} = ({}, {})",
            link.association, link.ends[0], link.ends[1]
        );
    }
    out
}

/// Writes a configuration file. The result parses back to an equal file.
pub fn serialize_config_file(file: &ConfigFile) -> String {
    let mut out = String::new();
    for (i, (name, config)) in file.configs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{name}]");
        out.push_str(&serialize_config(config));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;

    fn model() -> Model {
        parse_model(
            "model M
             abstract class Person attributes age : Integer end
             class Customer < Person end
             class Branch attributes rating : Real end
             association Visits between Customer [*] role visitor; Branch [*] role visited end
             constraints context Person inv adult: self.age >= 0",
            "m.use",
        )
        .unwrap()
    }

    #[test]
    fn abstract_class_bound_is_rejected() {
        let m = model();
        let mut c = default_config(&m);
        c.class_bounds.insert("Person".into(), Bound::exactly(1));
        let errs = validate(&c, &m);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, ConfigErrorKind::AbstractClassBound);
        assert_eq!(errs[0].key, "Person_min");
    }

    #[test]
    fn integer_range_from_minus_ten_to_ten_is_valid() {
        let m = model();
        let c = default_config(&m);
        assert_eq!((c.integer_min, c.integer_max), (-10, 10));
        assert!(validate(&c, &m).is_empty());
    }

    #[test]
    fn min_exceeding_max() {
        let m = model();
        let mut c = default_config(&m);
        c.class_bounds.insert("Customer".into(), Bound::between(2, 1));
        let errs = validate(&c, &m);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, ConfigErrorKind::MinExceedsMax);
    }

    #[test]
    fn default_config_shape() {
        let m = model();
        let c = default_config(&m);
        assert_eq!(c.class_bounds.keys().collect::<Vec<_>>(), vec!["Branch", "Customer"]);
        assert_eq!(c.default_upper, 10);
        assert_eq!(c.bitwidth, 8);
        assert_eq!(c.string_count, 10);
        assert_eq!(c.flag("Person::adult"), InvariantFlag::Active);
        let empty = default_config(&Model::empty("E"));
        assert!(empty.class_bounds.is_empty() && empty.association_bounds.is_empty());
        assert!(validate(&empty, &Model::empty("E")).is_empty());
    }

    #[test]
    fn missing_real_domain_is_reported() {
        let m = model();
        let mut c = default_config(&m);
        c.real_values = None;
        let errs = validate(&c, &m);
        assert_eq!(errs[0].kind, ConfigErrorKind::EmptyDomain);
        assert_eq!(errs[0].key, "Real_values");
    }

    #[test]
    fn generated_strings() {
        let c = Configuration {
            string_count: 3,
            ..Default::default()
        };
        assert_eq!(c.strings(), vec!["string1", "string2", "string3"]);
    }

    fn file() -> ConfigFile {
        let mut f = ConfigFile::default();
        f.configs.insert("base".into(), Configuration::default());
        f.configs.insert(
            "other".into(),
            Configuration {
                bitwidth: 5,
                ..Default::default()
            },
        );
        f
    }

    #[test]
    fn clone_rename_delete() {
        let f = file();
        let g = f.clone_config("base", None).unwrap();
        assert_eq!(g.names(), vec!["base", "base (copy)", "other"]);
        assert_eq!(g.get("base (copy)"), g.get("base"));
        assert_eq!(g.get("other"), f.get("other"));
        assert_eq!(
            f.rename_config("base", "other"),
            Err(ConfigFileError::DuplicateName("other".into()))
        );
        let r = f.rename_config("base", "first").unwrap();
        assert_eq!(r.names(), vec!["first", "other"]);
        let single = f.delete_config("other").unwrap();
        let none = single.delete_config("base").unwrap();
        assert!(none.configs.is_empty());
        assert_eq!(
            none.delete_config("base"),
            Err(ConfigFileError::UnknownConfig("base".into()))
        );
    }

    #[test]
    fn empty_file_serializes_to_nothing() {
        assert_eq!(serialize_config_file(&ConfigFile::default()), "");
    }
}
