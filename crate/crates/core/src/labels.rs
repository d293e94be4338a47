//! Label vocabulary.
//!
//! The canonical ROAD table orders agents first (indices 0-9), then actions
//! (10-28), then locations (29-40). Every other component refers to labels by
//! this index.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelGroup {
    Agent,
    Action,
    Location,
}

impl fmt::Display for LabelGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelGroup::Agent => "agent",
            LabelGroup::Action => "action",
            LabelGroup::Location => "location",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub name: String,
    pub abbrev: String,
    pub group: LabelGroup,
}

const ROAD_AGENTS: [(&str, &str); 10] = [
    ("Pedestrian", "Ped"),
    ("Car", "Car"),
    ("Cyclist", "Cyc"),
    ("Motorbike", "Mobike"),
    ("Medium vehicle", "MedVeh"),
    ("Large vehicle", "LarVeh"),
    ("Bus", "Bus"),
    ("Emergency vehicle", "EmVeh"),
    ("AV traffic light", "TL"),
    ("Other traffic light", "OthTL"),
];

const ROAD_ACTIONS: [(&str, &str); 19] = [
    ("Move away", "MovAway"),
    ("Move towards", "MovTow"),
    ("Move", "Mov"),
    ("Brake", "Brake"),
    ("Stop", "Stop"),
    ("Indicating left", "IncatLeft"),
    ("Indicating right", "IncatRht"),
    ("Hazard lights on", "HazLit"),
    ("Turn left", "TurLft"),
    ("Turn right", "TurRht"),
    ("Overtake", "Ovtak"),
    ("Wait to cross", "Wait2X"),
    ("Cross road from left", "XingFmLft"),
    ("Cross road from right", "XingFmRht"),
    ("Crossing", "Xing"),
    ("Push object", "PushObj"),
    ("Red traffic light", "Red"),
    ("Amber traffic light", "Amber"),
    ("Green traffic light", "Green"),
];

const ROAD_LOCATIONS: [(&str, &str); 12] = [
    ("AV lane", "VehLane"),
    ("Outgoing lane", "OutgoLane"),
    ("Outgoing cycle lane", "OutgoCycLane"),
    ("Incoming lane", "IncomLane"),
    ("Incoming cycle lane", "IncomCycLane"),
    ("Pavement", "Pav"),
    ("Left pavement", "LftPav"),
    ("Right pavement", "RhtPav"),
    ("Junction", "Jun"),
    ("Crossing location", "XingLoc"),
    ("Bus stop", "BusStop"),
    ("Parking", "Parking"),
];

/// Ordered label vocabulary with case-sensitive abbreviation lookup.
#[derive(Debug, Clone)]
pub struct LabelTable {
    entries: Vec<LabelEntry>,
    by_abbrev: HashMap<String, usize>,
}

impl PartialEq for LabelTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for LabelTable {}

impl LabelTable {
    /// Builds a table, rejecting empty or duplicate abbreviations.
    pub fn new(entries: Vec<LabelEntry>) -> Result<Self> {
        let mut by_abbrev = HashMap::with_capacity(entries.len());
        for (index, entry) in entries.iter().enumerate() {
            if entry.abbrev.is_empty() || entry.abbrev.contains(|c: char| c.is_whitespace() || ",{}#".contains(c)) {
                return Err(Error::LabelTable(format!("invalid abbreviation `{}`", entry.abbrev)));
            }
            if entry.abbrev == "not" {
                return Err(Error::LabelTable("`not` is reserved".into()));
            }
            if by_abbrev.insert(entry.abbrev.clone(), index).is_some() {
                return Err(Error::LabelTable(format!("duplicate abbreviation `{}`", entry.abbrev)));
            }
        }
        Ok(Self { entries, by_abbrev })
    }

    /// The 41-label ROAD vocabulary in canonical order.
    pub fn road() -> Self {
        let groups =
            [(LabelGroup::Agent, &ROAD_AGENTS[..]), (LabelGroup::Action, &ROAD_ACTIONS[..]), (LabelGroup::Location, &ROAD_LOCATIONS[..])];
        let entries = groups
            .iter()
            .flat_map(|(group, rows)| {
                rows.iter().map(move |(name, abbrev)| LabelEntry { name: (*name).to_owned(), abbrev: (*abbrev).to_owned(), group: *group })
            })
            .collect();
        Self::new(entries).expect("ROAD label table is well formed")
    }

    /// `n` anonymous labels `L0 .. L{n-1}`, used for small synthetic instances.
    pub fn synthetic(n: usize) -> Self {
        let entries =
            (0..n).map(|i| LabelEntry { name: format!("label {i}"), abbrev: format!("L{i}"), group: LabelGroup::Agent }).collect();
        Self::new(entries).expect("synthetic labels are unique")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&LabelEntry> {
        self.entries.get(index)
    }

    pub fn abbrev(&self, index: usize) -> &str {
        &self.entries[index].abbrev
    }

    pub fn index_of(&self, abbrev: &str) -> Option<usize> {
        self.by_abbrev.get(abbrev).copied()
    }

    pub fn group_count(&self, group: LabelGroup) -> usize {
        self.entries.iter().filter(|e| e.group == group).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn road_table_layout() {
        let t = LabelTable::road();
        assert_eq!(t.len(), 41);
        assert_eq!(t.group_count(LabelGroup::Agent), 10);
        assert_eq!(t.group_count(LabelGroup::Action), 19);
        assert_eq!(t.group_count(LabelGroup::Location), 12);
        assert_eq!(t.index_of("Ped"), Some(0));
        assert_eq!(t.index_of("OthTL"), Some(9));
        assert_eq!(t.index_of("MovAway"), Some(10));
        assert_eq!(t.index_of("Green"), Some(28));
        assert_eq!(t.index_of("VehLane"), Some(29));
        assert_eq!(t.index_of("Parking"), Some(40));
        // groups are contiguous
        let groups: Vec<_> = t.entries().iter().map(|e| e.group).collect();
        assert!(groups.windows(2).all(|w| w[0] as u8 <= w[1] as u8));
    }

    #[test]
    fn lookup_is_case_sensitive() {
        let t = LabelTable::road();
        assert_eq!(t.index_of("TL"), Some(8));
        assert_eq!(t.index_of("tl"), None);
        assert_eq!(t.index_of("ped"), None);
    }

    #[test]
    fn rejects_duplicate_abbrev() {
        let e = LabelEntry { name: "a".into(), abbrev: "A".into(), group: LabelGroup::Agent };
        assert!(LabelTable::new(vec![e.clone(), e]).is_err());
    }
}
