//! JSON model schema.
//!
//! ```json
//! {
//!   "templates":  [{"id": "top", "shape": {"bar": {"len": 600, "al": 45, "ar": 45}}, "material": "pine"}],
//!   "connectors": [{"id": "tl", "variants": [[], [{"template": "top", "shape": {"bar": {"len": 560}}}]]}],
//!   "stock":      [{"id": "s8", "shape": {"bar": {"len": 2400}}, "price": 10, "kerf": 3, "material": "pine"}],
//!   "tools":      [{"id": "chop", "kind": "chopsaw", "cut_time": 20, "setup_time": 60, "base_error": 0.5, "stack_limit": 2}],
//!   "designs":    [{"name": "input", "genes": [0]}]
//! }
//! ```
//!
//! An override either replaces a template's shape (`"shape"`) or edits one
//! end of a bar: `{"template": "top", "end": "left", "angle": 45, "trim": 0}`
//! sets that end's angle (default 90) and shortens the bar by `trim` mm.
//! `{"template": "lid", "omit": true}` leaves the part out of the design.
//! Bar angles default to 90 (square). `designs` is optional; the first entry is
//! treated as the input design.

use serde::Deserialize;

use super::{
    Connector, ConcretePart, DesignSpaceModel, DesignVector, NamedDesign, OverrideEffect, PartShape, ShapeOverride, BarEnd, SQUARE,
    StockType, Template, Tool, ToolKind, Variant,
};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    templates: Vec<RawTemplate>,
    #[serde(default)]
    connectors: Vec<RawConnector>,
    stock: Vec<RawStock>,
    tools: Vec<RawTool>,
    #[serde(default)]
    designs: Vec<RawDesign>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    id: String,
    shape: PartShape,
    material: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnector {
    id: String,
    variants: Vec<Vec<RawOverride>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverride {
    template: String,
    #[serde(default)]
    shape: Option<PartShape>,
    #[serde(default)]
    end: Option<BarEnd>,
    #[serde(default = "square")]
    angle: f64,
    #[serde(default)]
    trim: f64,
    #[serde(default)]
    omit: bool,
}

fn square() -> f64 {
    SQUARE
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStock {
    id: String,
    shape: PartShape,
    price: f64,
    #[serde(default)]
    kerf: f64,
    material: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTool {
    id: String,
    kind: ToolKind,
    cut_time: f64,
    #[serde(default)]
    setup_time: f64,
    #[serde(default)]
    base_error: f64,
    #[serde(default = "one")]
    stack_limit: u32,
}

fn one() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    #[serde(default)]
    name: String,
    genes: Vec<u32>,
}

/// Parses and validates a model from its JSON text.
pub fn parse_model(text: &str) -> Result<DesignSpaceModel> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawModel = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    let templates = raw
        .templates
        .into_iter()
        .map(|t| Template {
            id: t.id.as_str().into(),
            part: ConcretePart::new(&t.id, t.shape, &t.material),
        })
        .collect();
    let mut connectors = Vec::with_capacity(raw.connectors.len());
    for (ci, c) in raw.connectors.into_iter().enumerate() {
        let mut variants = Vec::with_capacity(c.variants.len());
        for (vi, v) in c.variants.into_iter().enumerate() {
            let mut overrides = Vec::with_capacity(v.len());
            for (oi, o) in v.into_iter().enumerate() {
                let effect = match (o.shape, o.end) {
                    (None, None) if o.omit => OverrideEffect::Omit,
                    (Some(shape), None) if !o.omit => OverrideEffect::Replace(shape),
                    (None, Some(end)) if !o.omit => OverrideEffect::End {
                        end,
                        angle: o.angle,
                        trim: o.trim,
                    },
                    _ => {
                        return Err(Error::Schema {
                            path: format!("connectors[{ci}].variants[{vi}][{oi}]"),
                            message: "an override needs exactly one of `shape`, `end` or `omit`".into(),
                        })
                    }
                };
                overrides.push(ShapeOverride {
                    template: o.template.into(),
                    effect,
                });
            }
            variants.push(Variant { overrides });
        }
        connectors.push(Connector {
            id: c.id.into(),
            variants,
        });
    }
    let stock = raw
        .stock
        .into_iter()
        .map(|s| StockType {
            id: s.id.into(),
            shape: s.shape,
            price: s.price,
            kerf: s.kerf,
            material: s.material.into(),
        })
        .collect();
    let tools = raw
        .tools
        .into_iter()
        .map(|t| Tool {
            id: t.id.into(),
            kind: t.kind,
            cut_time: t.cut_time,
            setup_time: t.setup_time,
            base_error: t.base_error,
            stack_limit: t.stack_limit,
        })
        .collect();
    let designs = raw
        .designs
        .into_iter()
        .map(|d| NamedDesign {
            name: d.name,
            genes: DesignVector(d.genes),
        })
        .collect();
    DesignSpaceModel::new(templates, connectors, stock, tools, designs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "templates": [{"id": "a", "shape": {"bar": {"len": 100}}, "material": "pine"}],
        "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 3, "kerf": 2, "material": "pine"}],
        "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}]
    }"#;

    #[test]
    fn minimal_model_has_one_assignment() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.connectors.len(), 0);
        let size = m.design_space_size(100);
        assert_eq!(size.assignments, 1u32.into());
        assert_eq!(size.unique_bops, 1);
        assert!(size.exact);
        assert_eq!(m.tools[0].stack_limit, 1);
    }

    #[test]
    fn schema_error_names_path() {
        let bad = MINIMAL.replace("\"price\": 3", "\"price\": \"cheap\"");
        match parse_model(&bad) {
            Err(Error::Schema { path, .. }) => assert!(path.contains("stock[0].price"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = MINIMAL.replace("\"kerf\": 2", "\"kerf\": 2, \"colour\": 1");
        assert!(matches!(parse_model(&unknown), Err(Error::Schema { .. })));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dup = MINIMAL.replace(
            r#""tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}]"#,
            r#""tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}, {"id": "saw", "kind": "chopsaw", "cut_time": 5}]"#,
        );
        assert!(matches!(
            parse_model(&dup),
            Err(Error::DuplicateId { kind: "tool", .. })
        ));
    }

    #[test]
    fn invariant_violations_rejected() {
        let neg = MINIMAL.replace("\"len\": 100", "\"len\": -1");
        assert!(matches!(parse_model(&neg), Err(Error::Invariant(_))));
        let no_stock = MINIMAL.replace("100}}, \"material\": \"pine\"", "100}}, \"material\": \"oak\"");
        assert!(matches!(parse_model(&no_stock), Err(Error::Invariant(_))));
    }

    #[test]
    fn design_gene_out_of_range_names_connector() {
        let text = r#"{
            "templates": [{"id": "a", "shape": {"bar": {"len": 100}}, "material": "pine"}],
            "connectors": [{"id": "corner", "variants": [[], [{"template": "a", "shape": {"bar": {"len": 90}}}]]}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 3, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}],
            "designs": [{"name": "input", "genes": [2]}]
        }"#;
        match parse_model(text) {
            Err(e @ Error::GeneOutOfRange { .. }) => assert!(e.to_string().contains("corner")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn override_must_reference_known_template() {
        let text = r#"{
            "templates": [{"id": "a", "shape": {"bar": {"len": 100}}, "material": "pine"}],
            "connectors": [{"id": "c", "variants": [[{"template": "zz", "shape": {"bar": {"len": 90}}}]]}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 3, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}]
        }"#;
        assert!(matches!(parse_model(text), Err(Error::Invariant(_))));
    }

    #[test]
    fn end_overrides_compose() {
        let text = r#"{
            "templates": [{"id": "top", "shape": {"bar": {"len": 600}}, "material": "pine"}],
            "connectors": [
                {"id": "tl", "variants": [[], [{"template": "top", "end": "left", "angle": 45}]]},
                {"id": "tr", "variants": [[], [{"template": "top", "end": "right", "trim": 40}]]}
            ],
            "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 3, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}]
        }"#;
        let m = parse_model(text).unwrap();
        let bag = m.instantiate_design(&DesignVector(vec![1, 1])).unwrap();
        assert_eq!(bag.parts()[0].shape, PartShape::mitered(560.0, 45.0, 90.0));
        let both = text.replace(r#""end": "left", "angle": 45"#, r#""end": "left", "shape": {"bar": {"len": 1}}"#);
        assert!(matches!(parse_model(&both), Err(Error::Schema { .. })));
    }

    #[test]
    fn omitted_parts_leave_the_bag() {
        let text = r#"{
            "templates": [
                {"id": "a", "shape": {"bar": {"len": 100}}, "material": "pine"},
                {"id": "b", "shape": {"bar": {"len": 200}}, "material": "pine"}
            ],
            "connectors": [{"id": "c", "variants": [[{"template": "b", "omit": true}], []]}],
            "stock": [{"id": "s", "shape": {"bar": {"len": 1000}}, "price": 3, "material": "pine"}],
            "tools": [{"id": "saw", "kind": "chopsaw", "cut_time": 10}]
        }"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.instantiate_design(&DesignVector(vec![0])).unwrap().len(), 1);
        assert_eq!(m.instantiate_design(&DesignVector(vec![1])).unwrap().len(), 2);
        let both = text.replace(r#""omit": true"#, r#""omit": true, "end": "left""#);
        assert!(matches!(parse_model(&both), Err(Error::Schema { .. })));
        let all = text.replace(r#"[[{"template": "b", "omit": true}], []]"#, r#"[[{"template": "b", "omit": true}, {"template": "a", "omit": true}]]"#);
        let m = parse_model(&all).unwrap();
        assert!(matches!(m.instantiate_design(&DesignVector(vec![0])), Err(Error::Invariant(_))));
    }
}
