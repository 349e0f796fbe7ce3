use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use crate::config::{
    validate, AttributeDomain, Bound, BoundMax, ConfigError, ConfigErrorKind, ConfigFile,
    Configuration, DomainValue, InvariantFlag, RequiredLink,
};
use crate::location::SourceLocation;
use crate::model::Model;
use crate::ocl::OclType;

#[derive(Clone, Debug)]
enum Target {
    IntegerMin,
    IntegerMax,
    StringCount,
    StringValues,
    RealValues,
    Bitwidth,
    DefaultUpper,
    ClassMin(String),
    ClassMax(String),
    AssocMin(String),
    AssocMax(String),
    AttrValues(String, String, OclType),
    AttrMin(String, String),
    AttrMax(String, String),
}

/// All keys valid for `model`, except the `inv::` and `link::` families.
fn key_table(model: &Model) -> HashMap<String, Target> {
    let mut keys = HashMap::new();
    for c in &model.classes {
        for (_, a) in model.all_attributes(&c.name) {
            let base = format!("{}_{}", c.name, a.name);
            if a.ty == OclType::Integer {
                keys.insert(format!("{base}_min"), Target::AttrMin(c.name.clone(), a.name.clone()));
                keys.insert(format!("{base}_max"), Target::AttrMax(c.name.clone(), a.name.clone()));
            }
            keys.insert(base, Target::AttrValues(c.name.clone(), a.name.clone(), a.ty.clone()));
        }
    }
    for a in &model.associations {
        keys.insert(format!("{}_min", a.name), Target::AssocMin(a.name.clone()));
        keys.insert(format!("{}_max", a.name), Target::AssocMax(a.name.clone()));
    }
    for c in &model.classes {
        keys.insert(format!("{}_min", c.name), Target::ClassMin(c.name.clone()));
        keys.insert(format!("{}_max", c.name), Target::ClassMax(c.name.clone()));
    }
    for (k, t) in [
        ("Integer_min", Target::IntegerMin),
        ("Integer_max", Target::IntegerMax),
        ("String_count", Target::StringCount),
        ("String_values", Target::StringValues),
        ("Real_values", Target::RealValues),
        ("bitwidth", Target::Bitwidth),
        ("default_upper", Target::DefaultUpper),
    ] {
        keys.insert(k.to_string(), t);
    }
    keys
}

fn nearest_key(key: &str, model: &Model, table: &HashMap<String, Target>) -> Option<String> {
    let candidates = table
        .keys()
        .cloned()
        .chain(model.invariants.iter().map(|i| format!("inv::{}", i.qualified_name())))
        .chain(model.associations.iter().map(|a| format!("link::{}", a.name)));
    candidates
        .map(|c| (strsim::levenshtein(key, &c), c))
        .min()
        .filter(|(d, c)| *d <= key.len().max(c.len()) / 2 + 1)
        .map(|(_, c)| c)
}

struct Value<'a> {
    text: &'a str,
    toks: Vec<Token>,
}

type ValueResult<T> = Result<T, String>;

impl Value<'_> {
    fn only(&self) -> &[Token] {
        &self.toks[..self.toks.len() - 1]
    }

    fn unsigned(&self) -> ValueResult<u32> {
        match self.only() {
            [Token { tok: Tok::Int(v), .. }] if *v >= 0 && *v <= u32::MAX as i64 => Ok(*v as u32),
            _ => Err(format!("expected a nonnegative integer, found `{}`", self.text)),
        }
    }

    fn upper(&self) -> ValueResult<BoundMax> {
        match self.only() {
            [Token { tok: Tok::Star, .. }] => Ok(BoundMax::Default),
            _ => self
                .unsigned()
                .map(BoundMax::Value)
                .map_err(|_| format!("expected a nonnegative integer or `*`, found `{}`", self.text)),
        }
    }

    fn integer(&self) -> ValueResult<i64> {
        signed_int(self.only()).ok_or_else(|| format!("expected an integer, found `{}`", self.text))
    }

    fn set(&self) -> ValueResult<Vec<&[Token]>> {
        let toks = self.only();
        let err = || format!("expected a set `{{v1, v2, ...}}`, found `{}`", self.text);
        let (Some(Tok::LBrace), Some(Tok::RBrace)) = (toks.first().map(|t| &t.tok), toks.last().map(|t| &t.tok)) else {
            return Err(err());
        };
        let inner = &toks[1..toks.len() - 1];
        if inner.is_empty() {
            return Ok(Vec::new());
        }
        let items: Vec<&[Token]> = inner.split(|t| t.tok == Tok::Comma).collect();
        if items.iter().any(|i| i.is_empty()) {
            return Err(err());
        }
        Ok(items)
    }

    fn typed_set(&self, ty: &OclType) -> ValueResult<Vec<DomainValue>> {
        self.set()?
            .into_iter()
            .map(|item| {
                domain_value(item, ty).ok_or_else(|| {
                    let text = &self.text[item[0].span.start as usize..item[item.len() - 1].span.end as usize];
                    format!("expected {} values, found `{text}`", ty)
                })
            })
            .collect()
    }

    fn pair(&self) -> ValueResult<[String; 2]> {
        match self.only() {
            [Token { tok: Tok::LParen, .. }, Token { tok: Tok::Ident(a), .. }, Token { tok: Tok::Comma, .. }, Token { tok: Tok::Ident(b), .. }, Token { tok: Tok::RParen, .. }] => {
                Ok([a.clone(), b.clone()])
            }
            _ => Err(format!("expected a pair of object names `(o1, o2)`, found `{}`", self.text)),
        }
    }

    fn flag(&self) -> ValueResult<InvariantFlag> {
        match self.only() {
            [Token { tok: Tok::Ident(s), .. }] => InvariantFlag::from_keyword(s),
            _ => None,
        }
        .ok_or_else(|| format!("expected `active`, `inactive` or `negated`, found `{}`", self.text))
    }
}

fn signed_int(toks: &[Token]) -> Option<i64> {
    match toks {
        [Token { tok: Tok::Int(v), .. }] => Some(*v),
        [Token { tok: Tok::Minus, .. }, Token { tok: Tok::Int(v), .. }] => v.checked_neg(),
        _ => None,
    }
}

fn signed_real(toks: &[Token]) -> Option<f64> {
    match toks {
        [Token { tok: Tok::Real(v), .. }] => Some(*v),
        [Token { tok: Tok::Minus, .. }, Token { tok: Tok::Real(v), .. }] => Some(-v),
        _ => signed_int(toks).map(|v| v as f64),
    }
}

fn domain_value(toks: &[Token], ty: &OclType) -> Option<DomainValue> {
    match ty {
        OclType::Integer => signed_int(toks).map(DomainValue::Integer),
        OclType::Real => match toks {
            [Token { tok: Tok::Real(_), .. }] | [Token { tok: Tok::Minus, .. }, Token { tok: Tok::Real(_), .. }] => {
                signed_real(toks).map(DomainValue::Real)
            }
            _ => signed_int(toks).map(DomainValue::Integer),
        },
        OclType::String => match toks {
            [Token { tok: Tok::Str(s), .. }] => Some(DomainValue::String(s.clone())),
            _ => None,
        },
        OclType::Boolean => match toks {
            [Token { tok: Tok::Ident(s), .. }] if s == "true" || s == "false" => {
                Some(DomainValue::Boolean(s == "true"))
            }
            _ => None,
        },
        _ => None,
    }
}

struct Section {
    name: String,
    config: Configuration,
    seen: HashMap<String, SourceLocation>,
}

/// Parses a multi-configuration file against `model` and validates every
/// configuration. Errors from all sections are reported together.
pub fn parse_config_file(text: &str, file: &str, model: &Model) -> Result<ConfigFile, Vec<ConfigError>> {
    let table = key_table(model);
    let mut errors = Vec::new();
    let mut sections: Vec<Section> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let indent = line.len() - line.trim_start().len();
        let body = line.trim();
        let loc = |col: usize| SourceLocation::new(file, line_no, line[..col].chars().count() as u32 + 1);
        let mut error = |kind, key: &str, message: String, col: usize, section: Option<&Section>| {
            errors.push(ConfigError {
                kind,
                key: key.to_string(),
                message,
                location: Some(loc(col)),
                config: section.map(|s| s.name.clone()),
            });
        };
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                error(ConfigErrorKind::Syntax, "", "expected `]` closing the section header".into(), indent, None);
                continue;
            };
            let name = name.trim();
            if name.is_empty() {
                error(ConfigErrorKind::Syntax, "", "configuration names must not be empty".into(), indent, None);
            } else if sections.iter().any(|s| s.name == name) {
                error(
                    ConfigErrorKind::DuplicateConfig,
                    "",
                    format!("configuration `{name}` is defined more than once"),
                    indent,
                    None,
                );
            }
            sections.push(Section {
                name: name.to_string(),
                config: Configuration::default(),
                seen: HashMap::new(),
            });
            continue;
        }
        let Some(eq) = body.find('=') else {
            error(ConfigErrorKind::Syntax, "", format!("expected `key = value`, found `{body}`"), indent, None);
            continue;
        };
        let key = body[..eq].trim();
        let value_text = body[eq + 1..].trim();
        let key_col = indent;
        let Some(section) = sections.last_mut() else {
            error(
                ConfigErrorKind::Syntax,
                key,
                format!("key `{key}` appears before any `[name]` section header"),
                key_col,
                None,
            );
            continue;
        };
        let key_loc = loc(key_col);
        let is_link = key.starts_with("link::");
        if !is_link {
            if let Some(first) = section.seen.get(key) {
                let message = format!("key `{key}` is already set at {first}");
                error(ConfigErrorKind::DuplicateKey, key, message, key_col, Some(section));
                continue;
            }
            section.seen.insert(key.to_string(), key_loc.clone());
        }
        let value = match tokenize(value_text) {
            Ok(toks) => Value { text: value_text, toks },
            Err(e) => {
                error(ConfigErrorKind::InvalidValue, key, format!("`{key}`: {}", e.message), key_col, Some(section));
                continue;
            }
        };
        let config = &mut section.config;
        config.locations.0.insert(key.to_string(), key_loc.clone());
        let outcome = apply(config, key, &value, &table);
        match outcome {
            Ok(()) => {}
            Err(Applied::Invalid(message)) => {
                let message = format!("invalid value for `{key}`: {message}");
                error(ConfigErrorKind::InvalidValue, key, message, key_col, Some(section));
            }
            Err(Applied::Unknown) => {
                let hint = nearest_key(key, model, &table)
                    .map(|k| format!("; did you mean `{k}`?"))
                    .unwrap_or_default();
                error(ConfigErrorKind::UnknownKey, key, format!("unknown key `{key}`{hint}"), key_col, Some(section));
            }
        }
    }

    let mut out = ConfigFile::default();
    for section in sections {
        for mut e in validate(&section.config, model) {
            e.config = Some(section.name.clone());
            errors.push(e);
        }
        out.configs.entry(section.name).or_insert(section.config);
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

enum Applied {
    Invalid(String),
    Unknown,
}

impl From<String> for Applied {
    fn from(s: String) -> Self {
        Applied::Invalid(s)
    }
}

fn apply(config: &mut Configuration, key: &str, value: &Value<'_>, table: &HashMap<String, Target>) -> Result<(), Applied> {
    if let Some(name) = key.strip_prefix("inv::") {
        if !name.contains("::") {
            return Err(Applied::Unknown);
        }
        config.invariant_flags.insert(name.to_string(), value.flag()?);
        return Ok(());
    }
    if let Some(assoc) = key.strip_prefix("link::") {
        let ends = value.pair()?;
        config.required_links.push(RequiredLink {
            association: assoc.to_string(),
            ends,
        });
        return Ok(());
    }
    let Some(target) = table.get(key) else {
        return Err(Applied::Unknown);
    };
    let locs = &mut config.locations.0;
    match target {
        Target::IntegerMin => config.integer_min = value.integer()?,
        Target::IntegerMax => config.integer_max = value.integer()?,
        Target::StringCount => config.string_count = value.unsigned()?,
        Target::Bitwidth => config.bitwidth = value.unsigned()?,
        Target::DefaultUpper => config.default_upper = value.unsigned()?,
        Target::StringValues => {
            let values = value.typed_set(&OclType::String)?;
            config.string_values = Some(
                values
                    .into_iter()
                    .map(|v| match v {
                        DomainValue::String(s) => s,
                        _ => unreachable!("typed as String"),
                    })
                    .collect(),
            );
        }
        Target::RealValues => {
            let values = value.typed_set(&OclType::Real)?;
            config.real_values = Some(
                values
                    .into_iter()
                    .map(|v| match v {
                        DomainValue::Real(r) => r,
                        DomainValue::Integer(i) => i as f64,
                        _ => unreachable!("typed as Real"),
                    })
                    .collect(),
            );
        }
        Target::ClassMin(c) | Target::ClassMax(c) | Target::AssocMin(c) | Target::AssocMax(c) => {
            let is_min = matches!(target, Target::ClassMin(_) | Target::AssocMin(_));
            let map = if matches!(target, Target::ClassMin(_) | Target::ClassMax(_)) {
                &mut config.class_bounds
            } else {
                &mut config.association_bounds
            };
            let bound = map.entry(c.clone()).or_insert(Bound::open());
            if is_min {
                bound.min = value.unsigned()?;
            } else {
                bound.max = value.upper()?;
            }
            if let Some(l) = locs.get(key).cloned() {
                locs.entry(format!("{c}_min")).or_insert(l);
            }
        }
        Target::AttrValues(c, a, ty) => {
            let values = value.typed_set(ty)?;
            let slot = config.attribute_domains.entry(c.clone()).or_default();
            if matches!(slot.get(a), Some(AttributeDomain::Range { .. })) {
                return Err(format!("`{c}_{a}` cannot be combined with `{c}_{a}_min`/`{c}_{a}_max`").into());
            }
            slot.insert(a.clone(), AttributeDomain::Values(values));
        }
        Target::AttrMin(c, a) | Target::AttrMax(c, a) => {
            let v = value.integer()?;
            let slot = config.attribute_domains.entry(c.clone()).or_default();
            let domain = slot
                .entry(a.clone())
                .or_insert(AttributeDomain::Range { min: None, max: None });
            let AttributeDomain::Range { min, max } = domain else {
                return Err(format!("`{key}` cannot be combined with the value set `{c}_{a}`").into());
            };
            if matches!(target, Target::AttrMin(..)) {
                *min = Some(v);
            } else {
                *max = Some(v);
            }
            if let Some(l) = locs.get(key).cloned() {
                locs.entry(format!("{c}_{a}_min")).or_insert(l);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::serialize_config_file;
    use crate::parse::parse_model;

    fn model() -> Model {
        parse_model(
            "model M
             abstract class Person attributes age : Integer name : String end
             class Customer < Person end
             class Branch attributes open : Boolean end
             association Visits between Customer [*] role visitor; Branch [*] role visited end
             constraints context Person inv adult: self.age >= 0",
            "m.use",
        )
        .unwrap()
    }

    const TEXT: &str = "# scenario
[base]
Integer_min = -10
Integer_max = 10
Customer_min = 1
Customer_max = *
Visits_max = 3
Customer_age = {1, 2, -3}
Person_name = {'a', 'it\\'s'}
inv::Person::adult = negated
link::Visits = (c1, b1)

[second]
bitwidth = 5
Person_age_min = 0
";

    #[test]
    fn parses_sections_and_keys() {
        let f = parse_config_file(TEXT, "c.properties", &model()).unwrap();
        assert_eq!(f.names(), vec!["base", "second"]);
        let base = f.get("base").unwrap();
        assert_eq!(base.class_bound("Customer"), Bound { min: 1, max: BoundMax::Default });
        assert_eq!(base.association_bound("Visits"), Bound::between(0, 3));
        assert_eq!(base.flag("Person::adult"), InvariantFlag::Negated);
        assert_eq!(base.required_links[0].ends, ["c1".to_string(), "b1".to_string()]);
        assert_eq!(
            base.attribute_domains["Customer"]["age"],
            AttributeDomain::Values(vec![DomainValue::Integer(1), DomainValue::Integer(2), DomainValue::Integer(-3)])
        );
        assert_eq!(
            base.attribute_domains["Person"]["name"],
            AttributeDomain::Values(vec![DomainValue::String("a".into()), DomainValue::String("it's".into())])
        );
        let second = f.get("second").unwrap();
        assert_eq!(second.bitwidth, 5);
        assert_eq!(
            second.attribute_domains["Person"]["age"],
            AttributeDomain::Range { min: Some(0), max: None }
        );
        assert_eq!(base.location_of("Customer_max").unwrap(), SourceLocation::new("c.properties", 6, 1));
    }

    #[test]
    fn round_trip() {
        let m = model();
        let f = parse_config_file(TEXT, "c.properties", &m).unwrap();
        let text = serialize_config_file(&f);
        let g = parse_config_file(&text, "c.properties", &m).unwrap();
        assert_eq!(f, g);
        assert_eq!(serialize_config_file(&g), text);
    }

    #[test]
    fn unparseable_value_names_key() {
        let errs = parse_config_file("[c]\nCustomer_min = abc\n", "c.properties", &model()).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, ConfigErrorKind::InvalidValue);
        assert_eq!(errs[0].key, "Customer_min");
        assert!(errs[0].message.contains("`Customer_min`"));
        assert_eq!(errs[0].location.as_ref().unwrap().line, 2);
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let errs = parse_config_file("[c]\nCustomr_min = 1\n", "c.properties", &model()).unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::UnknownKey);
        assert!(errs[0].message.contains("did you mean `Customer_min`?"), "{}", errs[0].message);
    }

    #[test]
    fn abstract_bound_is_reported_by_validation() {
        let errs = parse_config_file("[c]\nPerson_min = 1\nPerson_max = 1\n", "c.properties", &model()).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, ConfigErrorKind::AbstractClassBound);
        assert_eq!(errs[0].config.as_deref(), Some("c"));
        assert_eq!(errs[0].location.as_ref().unwrap().line, 2);
    }

    #[test]
    fn structural_errors() {
        let m = model();
        let errs = parse_config_file("Customer_min = 1\n", "c", &m).unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::Syntax);
        let errs = parse_config_file("[a]\n[a]\n", "c", &m).unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::DuplicateConfig);
        let errs = parse_config_file("[a]\nbitwidth = 3\nbitwidth = 4\n", "c", &m).unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::DuplicateKey);
        let errs = parse_config_file("[a]\nBranch_open = {1}\n", "c", &m).unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::InvalidValue);
    }

    #[test]
    fn crlf_and_comments() {
        let f = parse_config_file("[a]\r\n# note\r\nbitwidth = 4\r\n", "c", &model()).unwrap();
        assert_eq!(f.get("a").unwrap().bitwidth, 4);
    }
}
