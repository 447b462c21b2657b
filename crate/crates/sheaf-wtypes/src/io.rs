//! JSON formats for sites, presheaves, presheaf morphisms and trees.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sheaf_wtypes_core::{
    FiniteCategory, FiniteSite, MorId, ObjId, Presheaf, PresheafError, PresheafMorphism, Sieve,
    SiteError, Topology, TreeId, TreeStore,
};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Site(#[from] SiteError),
    #[error("{0}")]
    Presheaf(#[from] PresheafError),
    #[error("unknown object `{0}` in topology")]
    TopologyObject(String),
    #[error("unknown morphism `{name}` in a sieve on `{object}`")]
    SieveMorphism { object: String, name: String },
    #[error("a sieve must be a list of morphisms or \"max\", found \"{0}\"")]
    SieveKeyword(String),
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDecl {
    pub id: String,
    pub dom: String,
    pub cod: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionEntry {
    pub after: String,
    pub then: String,
    pub equals: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SieveSpec {
    Keyword(String),
    Arrows(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteFile {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismDecl>,
    pub identities: BTreeMap<String, String>,
    pub composition: Vec<CompositionEntry>,
    pub topology: BTreeMap<String, Vec<SieveSpec>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionEntry {
    pub elem: String,
    pub along: String,
    pub equals: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafFile {
    pub elements: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub restriction: Vec<RestrictionEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismFile {
    pub map: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| InputError::Io { path: path.display().to_string(), source })?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|source| InputError::Json { path: origin.to_string(), source })
}

impl SiteFile {
    pub fn category(&self) -> Result<FiniteCategory, InputError> {
        let objects: Vec<&str> = self.objects.iter().map(String::as_str).collect();
        let morphisms: Vec<(&str, &str, &str)> =
            self.morphisms.iter().map(|m| (m.id.as_str(), m.dom.as_str(), m.cod.as_str())).collect();
        let identities: Vec<(&str, &str)> =
            self.identities.iter().map(|(o, m)| (o.as_str(), m.as_str())).collect();
        let composition: Vec<(&str, &str, &str)> = self
            .composition
            .iter()
            .map(|c| (c.after.as_str(), c.then.as_str(), c.equals.as_str()))
            .collect();
        Ok(FiniteCategory::from_tables(&objects, &morphisms, &identities, &composition)?)
    }

    /// The site, unvalidated. Objects missing from `topology` get no
    /// covering sieves, which the validator reports.
    pub fn site(&self) -> Result<FiniteSite, InputError> {
        let cat = self.category()?;
        let mut cov: Vec<Vec<Sieve>> = vec![Vec::new(); cat.num_objects()];
        for (obj, sieves) in &self.topology {
            let a = cat.object_by_name(obj).ok_or_else(|| InputError::TopologyObject(obj.clone()))?;
            for spec in sieves {
                let sieve = match spec {
                    SieveSpec::Keyword(k) if k == "max" => cat.maximal_sieve(a),
                    SieveSpec::Keyword(k) => return Err(InputError::SieveKeyword(k.clone())),
                    SieveSpec::Arrows(names) => {
                        let mut members = Vec::with_capacity(names.len());
                        for name in names {
                            let f = cat.morphism_by_name(name).ok_or_else(|| {
                                InputError::SieveMorphism { object: obj.clone(), name: name.clone() }
                            })?;
                            members.push(f);
                        }
                        Sieve::new(a, members)
                    }
                };
                cov[a.index()].push(sieve);
            }
        }
        Ok(FiniteSite::new(cat, Topology::new(cov)))
    }

    pub fn from_site(site: &FiniteSite) -> SiteFile {
        let cat = site.category();
        let name = |f: MorId| cat.morphism_name(f).to_string();
        let mut composition = Vec::new();
        for f in cat.morphisms() {
            for g in cat.morphisms() {
                if let Ok(h) = cat.compose(f, g) {
                    composition.push(CompositionEntry { after: name(f), then: name(g), equals: name(h) });
                }
            }
        }
        SiteFile {
            objects: cat.objects().map(|a| cat.object_name(a).to_string()).collect(),
            morphisms: cat
                .morphisms()
                .map(|f| MorphismDecl {
                    id: name(f),
                    dom: cat.object_name(cat.dom(f)).to_string(),
                    cod: cat.object_name(cat.cod(f)).to_string(),
                })
                .collect(),
            identities: cat
                .objects()
                .filter_map(|a| cat.try_identity(a).map(|id| (cat.object_name(a).to_string(), name(id))))
                .collect(),
            composition,
            topology: cat
                .objects()
                .map(|a| {
                    let max = cat.maximal_sieve(a);
                    let list = site
                        .covering(a)
                        .iter()
                        .map(|s| {
                            if *s == max {
                                SieveSpec::Keyword("max".to_string())
                            } else {
                                SieveSpec::Arrows(s.members().iter().map(|&f| name(f)).collect())
                            }
                        })
                        .collect();
                    (cat.object_name(a).to_string(), list)
                })
                .collect(),
        }
    }
}

impl PresheafFile {
    pub fn presheaf(&self, cat: &FiniteCategory) -> Result<Presheaf, InputError> {
        let elements: Vec<(&str, Vec<&str>)> = self
            .elements
            .iter()
            .map(|(o, list)| (o.as_str(), list.iter().map(String::as_str).collect()))
            .collect();
        let restriction: Vec<(&str, &str, &str)> = self
            .restriction
            .iter()
            .map(|r| (r.elem.as_str(), r.along.as_str(), r.equals.as_str()))
            .collect();
        Ok(Presheaf::from_named(cat, &elements, &restriction)?)
    }

    /// Identity restrictions are left out; they are filled in on reading.
    pub fn from_presheaf(cat: &FiniteCategory, p: &Presheaf) -> PresheafFile {
        let mut restriction = Vec::new();
        for f in cat.morphisms() {
            let (a, b) = (cat.cod(f), cat.dom(f));
            if cat.try_identity(a) == Some(f) {
                continue;
            }
            for x in 0..p.len(a) as u32 {
                if let Some(y) = p.try_restrict(x, f) {
                    restriction.push(RestrictionEntry {
                        elem: p.name(a, x).to_string(),
                        along: cat.morphism_name(f).to_string(),
                        equals: p.name(b, y).to_string(),
                    });
                }
            }
        }
        PresheafFile {
            elements: cat
                .objects()
                .map(|a| (cat.object_name(a).to_string(), p.elements(a).to_vec()))
                .collect(),
            restriction,
        }
    }
}

impl MorphismFile {
    pub fn morphism(
        &self,
        cat: &FiniteCategory,
        source: &Presheaf,
        target: &Presheaf,
    ) -> Result<PresheafMorphism, InputError> {
        let entries: Vec<(&str, &str, &str)> = self
            .map
            .iter()
            .flat_map(|(o, m)| m.iter().map(move |(y, x)| (o.as_str(), y.as_str(), x.as_str())))
            .collect();
        Ok(PresheafMorphism::from_named(cat, source, target, &entries)?)
    }

    pub fn from_morphism(
        cat: &FiniteCategory,
        source: &Presheaf,
        target: &Presheaf,
        m: &PresheafMorphism,
    ) -> MorphismFile {
        MorphismFile {
            map: cat
                .objects()
                .map(|a| {
                    let inner = (0..source.len(a) as u32)
                        .map(|y| (source.name(a, y).to_string(), target.name(a, m.apply(a, y)).to_string()))
                        .collect();
                    (cat.object_name(a).to_string(), inner)
                })
                .collect(),
        }
    }
}

pub fn sieve_json(cat: &FiniteCategory, s: &Sieve) -> Value {
    Value::Array(s.members().iter().map(|&f| json!(cat.morphism_name(f))).collect())
}

/// `{"root": {"obj", "elem", "sieve"}, "children": [{"edge": {"mor", "elem"}, "tree"}]}`.
pub fn tree_json(store: &TreeStore<'_>, t: TreeId) -> Value {
    let inst = store.instance();
    let cat = inst.site().category();
    let l = store.label(t);
    let children: Vec<Value> = store
        .edges(t)
        .iter()
        .zip(store.children(t))
        .map(|(e, &c)| {
            json!({
                "edge": {
                    "mor": cat.morphism_name(e.mor),
                    "elem": inst.y().name(cat.dom(e.mor), e.elem),
                },
                "tree": tree_json(store, c),
            })
        })
        .collect();
    json!({
        "root": {
            "obj": cat.object_name(l.obj),
            "elem": inst.x().name(l.obj, l.elem),
            "sieve": sieve_json(cat, inst.sieve(l)),
        },
        "children": children,
    })
}

/// A compact one-line rendering: `x{id:child,...}` with the sieve in
/// brackets when it is not maximal.
pub fn tree_text(store: &TreeStore<'_>, t: TreeId) -> String {
    let inst = store.instance();
    let cat = inst.site().category();
    let l = store.label(t);
    let mut out = inst.x().name(l.obj, l.elem).to_string();
    let sieve = inst.sieve(l);
    if *sieve != cat.maximal_sieve(l.obj) {
        out.push_str(&cat.sieve_label(sieve));
    }
    if !store.edges(t).is_empty() {
        let parts: Vec<String> = store
            .edges(t)
            .iter()
            .zip(store.children(t))
            .map(|(e, &c)| format!("{}:{}", cat.morphism_name(e.mor), tree_text(store, c)))
            .collect();
        out.push('(');
        out.push_str(&parts.join(","));
        out.push(')');
    }
    out
}

pub fn object_name(cat: &FiniteCategory, a: ObjId) -> String {
    cat.object_name(a).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sheaf_wtypes_core::fixtures;

    #[test]
    fn site_round_trip() {
        for site in [fixtures::fixture_a(), fixtures::fixture_b(), fixtures::fixture_c()] {
            let file = SiteFile::from_site(&site);
            let text = serde_json::to_string(&file).unwrap();
            let back: SiteFile = parse_json(&text, "test").unwrap();
            let site2 = back.site().unwrap();
            assert!(site2.validate().is_valid());
            assert_eq!(SiteFile::from_site(&site2), file);
        }
    }

    #[test]
    fn max_keyword_and_bad_keyword() {
        let text = r#"{"objects":["*"],"morphisms":[{"id":"id","dom":"*","cod":"*"}],
            "identities":{"*":"id"},"composition":[{"after":"id","then":"id","equals":"id"}],
            "topology":{"*":["max",[]]}}"#;
        let site = parse_json::<SiteFile>(text, "t").unwrap().site().unwrap();
        assert_eq!(site.covering(ObjId(0)).len(), 2);
        let bad = text.replace("\"max\"", "\"all\"");
        assert!(matches!(
            parse_json::<SiteFile>(&bad, "t").unwrap().site(),
            Err(InputError::SieveKeyword(_))
        ));
    }

    #[test]
    fn presheaf_round_trip() {
        let c = fixtures::fixture_c();
        let cat = c.category();
        let x = Presheaf::from_named(
            cat,
            &[("a", vec!["p", "q"]), ("b", vec!["r", "s"])],
            &[("p", "m", "r"), ("q", "m", "s")],
        )
        .unwrap();
        let file = PresheafFile::from_presheaf(cat, &x);
        assert_eq!(file.restriction.len(), 2);
        assert_eq!(file.presheaf(cat).unwrap(), x);
    }
}
