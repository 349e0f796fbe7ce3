//! Proptest strategies for configuration files and states.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use umlval::config::{AttributeDomain, Bound, BoundMax, ConfigFile, Configuration, DomainValue, InvariantFlag, RequiredLink};
use umlval::model::Model;
use umlval::ocl::OclType;
use umlval::state::{Link, SystemState, Value};

use super::carrental;

pub fn bound() -> impl Strategy<Value = Bound> {
    (0u32..6, prop::option::of(0u32..6)).prop_map(|(min, extra)| Bound {
        min,
        max: extra.map_or(BoundMax::Default, |e| BoundMax::Value(min + e)),
    })
}

pub fn text_value() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 _'\\\\-]{0,8}"
}

pub fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1000i32..1000).prop_map(|v| v as f64 / 8.0),
        (-1.0e6f64..1.0e6),
        Just(0.1),
        Just(-0.0),
    ]
}

pub fn configuration(model: &'static Model) -> impl Strategy<Value = Configuration> {
    let classes: Vec<String> = model.classes.iter().filter(|c| !c.is_abstract).map(|c| c.name.clone()).collect();
    let assocs: Vec<String> = model.associations.iter().map(|a| a.name.clone()).collect();
    let invs: Vec<String> = model.invariants.iter().map(|i| i.qualified_name()).collect();
    let int_attrs: Vec<(String, String)> = model
        .classes
        .iter()
        .flat_map(|c| {
            c.attributes
                .iter()
                .filter(|a| a.ty == OclType::Integer)
                .map(move |a| (c.name.clone(), a.name.clone()))
        })
        .collect();
    let str_attrs: Vec<(String, String)> = model
        .classes
        .iter()
        .flat_map(|c| {
            c.attributes
                .iter()
                .filter(|a| a.ty == OclType::String)
                .map(move |a| (c.name.clone(), a.name.clone()))
        })
        .collect();
    let flag = prop_oneof![
        Just(InvariantFlag::Active),
        Just(InvariantFlag::Inactive),
        Just(InvariantFlag::Negated)
    ];
    let int_domain = prop_oneof![
        // A range needs at least one end to be written down.
        (prop::option::of(-50i64..0), prop::option::of(0i64..50))
            .prop_filter("open range", |(a, b)| a.is_some() || b.is_some())
            .prop_map(|(min, max)| AttributeDomain::Range { min, max }),
        prop::collection::vec(-50i64..50, 1..4)
            .prop_map(|vs| AttributeDomain::Values(vs.into_iter().map(DomainValue::Integer).collect())),
    ];
    let str_domain = prop::collection::vec(text_value(), 1..3)
        .prop_map(|vs| AttributeDomain::Values(vs.into_iter().map(DomainValue::String).collect()));
    let link = (0..assocs.len(), "[a-z][a-z0-9]{0,4}", "[a-z][a-z0-9]{0,4}").prop_map({
        let assocs = assocs.clone();
        move |(i, a, b)| RequiredLink {
            association: assocs[i].clone(),
            ends: [a, b],
        }
    });
    (
        (-100i64..=0, 0i64..=100, 1u32..20),
        prop::option::of(prop::collection::vec(text_value(), 1..4)),
        prop::option::of(prop::collection::vec(real(), 1..4)),
        prop::collection::btree_map(prop::sample::select(classes), bound(), 0..5),
        prop::collection::btree_map(prop::sample::select(assocs), bound(), 0..4),
        prop::collection::btree_map(prop::sample::select(invs), flag, 0..4),
        prop::collection::btree_map(prop::sample::select(int_attrs), int_domain, 0..3),
        prop::collection::btree_map(prop::sample::select(str_attrs), str_domain, 0..2),
        (8u32..=63, prop::collection::vec(link, 0..3)),
    )
        .prop_map(
            |((imin, imax, scount), svals, reals, cb, ab, flags, idom, sdom, (bitwidth, links))| {
                let mut attribute_domains: BTreeMap<String, BTreeMap<String, AttributeDomain>> = BTreeMap::new();
                for ((c, a), d) in idom.into_iter().chain(sdom) {
                    attribute_domains.entry(c).or_default().insert(a, d);
                }
                Configuration {
                    integer_min: imin,
                    integer_max: imax,
                    string_count: scount,
                    string_values: svals,
                    real_values: reals,
                    class_bounds: cb,
                    association_bounds: ab,
                    attribute_domains,
                    invariant_flags: flags,
                    bitwidth,
                    required_links: links,
                    ..Configuration::default()
                }
            },
        )
}

pub fn model() -> &'static Model {
    static M: std::sync::OnceLock<Model> = std::sync::OnceLock::new();
    M.get_or_init(carrental)
}

pub fn config_file() -> impl Strategy<Value = ConfigFile> {
    prop::collection::vec(("[a-z][a-zA-Z0-9_ .-]{0,10}[a-z0-9]", configuration(model())), 1..4).prop_map(|cs| {
        let mut f = ConfigFile::default();
        for (n, c) in cs {
            f.configs.entry(n).or_insert(c);
        }
        f
    })
}

pub fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Undefined),
        any::<bool>().prop_map(Value::Boolean),
        any::<i64>().prop_map(Value::Integer),
        real().prop_map(Value::Real),
        text_value().prop_map(Value::String),
        "[a-z]{1,4}[0-9]".prop_map(Value::Object),
    ]
}

pub fn state() -> impl Strategy<Value = SystemState> {
    let object = (
        prop::sample::select(vec!["Customer", "Employee", "Branch", "Car", "X"]),
        prop::collection::btree_map("[a-z][a-zA-Z]{0,6}", value(), 0..4),
    );
    prop::collection::btree_map("[a-z][a-z0-9_]{0,5}", object, 0..6).prop_flat_map(|objects| {
        let names: Vec<String> = objects.keys().cloned().collect();
        let links = if names.is_empty() {
            Just(BTreeSet::new()).boxed()
        } else {
            prop::collection::btree_set(
                (
                    prop::sample::select(vec!["Employment", "Management", "Other"]),
                    prop::sample::select(names.clone()),
                    prop::sample::select(names),
                )
                    .prop_map(|(a, x, y)| Link::new(a, x, y)),
                0..6,
            )
            .boxed()
        };
        (Just(objects), links).prop_map(|(objects, links)| {
            let mut s = SystemState::new();
            for (name, (class, attrs)) in objects {
                s.add_object(&name, class);
                for (a, v) in attrs {
                    s.set_attr(&name, a, v);
                }
            }
            s.links = links;
            s
        })
    })
}

