use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The 34 parent FIGER types, sorted by corpus frequency.
pub const DEFAULT_CLASSES: [&str; 34] = [
    "location",
    "person",
    "organization",
    "art",
    "event",
    "broadcast_program",
    "title",
    "product",
    "living_thing",
    "people-ethnicity",
    "language",
    "broadcast_network",
    "time",
    "religion-religion",
    "award",
    "internet-website",
    "god",
    "education-educational_degree",
    "food",
    "computer-programming_language",
    "metropolitan_transit-transit_line",
    "transit",
    "finance-currency",
    "disease",
    "chemistry",
    "body_part",
    "finance-stock_exchange",
    "law",
    "medicine-medical_treatment",
    "medicine-drug",
    "broadcast-tv_channel",
    "medicine-symptom",
    "biology",
    "visual_art-color",
];

/// Index of an S-class within its inventory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId(pub u16);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A closed, ordered set of S-class names. The line/position of a name is its id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassInventory {
    names: Vec<String>,
    index: HashMap<String, ClassId>,
}

impl ClassInventory {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Inventory("no classes".into()));
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::Inventory(format!("{} classes", names.len())));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',' || c == ':') {
                return Err(Error::Inventory(format!("invalid class name `{name}`")));
            }
            if index.insert(name.clone(), ClassId(i as u16)).is_some() {
                return Err(Error::Inventory(format!("duplicate class `{name}`")));
            }
        }
        Ok(ClassInventory { names, index })
    }

    /// The default inventory of 34 classes.
    pub fn figer_parents() -> Self {
        Self::new(DEFAULT_CLASSES).expect("default inventory is valid")
    }

    /// Reads one class name per line; blank lines are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.names.join("\n");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<ClassId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    pub fn name(&self, id: ClassId) -> &str {
        &self.names[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.names.len()).map(|i| ClassId(i as u16))
    }
}
