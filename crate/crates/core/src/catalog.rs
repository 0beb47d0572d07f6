//! Object catalogs on disk: one JSON document per object plus an optional
//! `categories.json` that groups objects by how they produce the effect.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::ObjectSpec;

pub const CATEGORIES_FILE: &str = "categories.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    BurnFuel,
    Electric,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::BurnFuel => "burn_fuel",
            Category::Electric => "electric",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectCategory {
    pub id: Category,
    pub members: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("object `{0}` is defined twice")]
    DuplicateObject(String),
    #[error("object `{0}` belongs to more than one category")]
    MultipleCategories(String),
    #[error("object `{0}` has no category")]
    Uncategorized(String),
    #[error("category member `{0}` is not in the catalog")]
    UnknownMember(String),
}

/// Object → category lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryTable {
    by_object: BTreeMap<String, Category>,
}

#[derive(Serialize, Deserialize)]
struct CategoriesDoc {
    #[serde(default = "crate::schema_version")]
    v: u32,
    categories: Vec<ObjectCategory>,
}

impl CategoryTable {
    pub fn from_categories(categories: &[ObjectCategory]) -> Result<Self, CatalogError> {
        let mut by_object = BTreeMap::new();
        for cat in categories {
            for member in &cat.members {
                if by_object.insert(member.clone(), cat.id).is_some() {
                    return Err(CatalogError::MultipleCategories(member.clone()));
                }
            }
        }
        Ok(CategoryTable { by_object })
    }

    /// Burn-fuel lights versus electric lights.
    pub fn light_sources() -> Self {
        Self::from_categories(&[
            ObjectCategory {
                id: Category::BurnFuel,
                members: vec!["candle".into(), "kerosene_lamp".into()],
            },
            ObjectCategory {
                id: Category::Electric,
                members: vec!["desk_lamp".into(), "flashlight".into()],
            },
        ])
        .expect("fixture categories are disjoint")
    }

    pub fn category_of(&self, object_id: &str) -> Option<Category> {
        self.by_object.get(object_id).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.by_object.is_empty()
    }

    pub fn categories(&self) -> Vec<ObjectCategory> {
        let mut grouped: BTreeMap<Category, Vec<String>> = BTreeMap::new();
        for (object, cat) in &self.by_object {
            grouped.entry(*cat).or_default().push(object.clone());
        }
        grouped
            .into_iter()
            .map(|(id, members)| ObjectCategory { id, members })
            .collect()
    }
}

/// Catalog listing entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub id: String,
    pub display_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    pub parts: Vec<PartSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSummary {
    pub id: String,
    pub display_name: String,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    objects: Vec<ObjectSpec>,
    categories: CategoryTable,
}

impl Catalog {
    pub fn new(mut objects: Vec<ObjectSpec>, categories: CategoryTable) -> Result<Self, CatalogError> {
        objects.sort_by(|a, b| a.id().cmp(b.id()));
        for pair in objects.windows(2) {
            if pair[0].id() == pair[1].id() {
                return Err(CatalogError::DuplicateObject(pair[0].id().to_string()));
            }
        }
        if !categories.is_empty() {
            for object in &objects {
                if categories.category_of(object.id()).is_none() {
                    return Err(CatalogError::Uncategorized(object.id().to_string()));
                }
            }
            for member in categories.by_object.keys() {
                if objects.binary_search_by(|o| o.id().cmp(member)).is_err() {
                    return Err(CatalogError::UnknownMember(member.clone()));
                }
            }
        }
        Ok(Catalog { objects, categories })
    }

    /// Loads every `*.json` file in `dir` as an object, except
    /// `categories.json`, which is read as the category table.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let dir = dir.as_ref();
        let io = |path: &Path, source| CatalogError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| io(dir, e))?
            .map(|entry| entry.map(|e| e.path()).map_err(|e| io(dir, e)))
            .collect::<Result<_, _>>()?;
        paths.sort();

        let mut objects = Vec::new();
        let mut categories = CategoryTable::default();
        for path in paths {
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
            let parse = |source| CatalogError::Parse {
                path: path.clone(),
                source,
            };
            if path.file_name().and_then(|n| n.to_str()) == Some(CATEGORIES_FILE) {
                let doc: CategoriesDoc = serde_json::from_str(&text).map_err(parse)?;
                categories = CategoryTable::from_categories(&doc.categories)?;
            } else {
                objects.push(serde_json::from_str(&text).map_err(parse)?);
            }
        }
        Catalog::new(objects, categories)
    }

    /// Objects sorted by id.
    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn get(&self, id: &str) -> Option<&ObjectSpec> {
        self.objects
            .binary_search_by(|o| o.id().cmp(id))
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn categories(&self) -> &CategoryTable {
        &self.categories
    }

    pub fn summaries(&self) -> Vec<ObjectSummary> {
        self.objects
            .iter()
            .map(|o| ObjectSummary {
                id: o.id().to_string(),
                display_name: o.display_name().to_string(),
                category: self.categories.category_of(o.id()),
                parts: o
                    .parts()
                    .iter()
                    .map(|p| PartSummary {
                        id: p.id.clone(),
                        display_name: p.display_name.clone(),
                    })
                    .collect(),
            })
            .collect()
    }
}
