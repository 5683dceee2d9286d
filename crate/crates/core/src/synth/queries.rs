use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::read_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Direct,
    Implicit,
}

/// A text query with the part instances that answer it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query_text: String,
    pub kind: QueryKind,
    /// sorted ascending
    pub gt_part_ids: Vec<u32>,
}

/// One direct query per distinct label in `labels` (part id → object_part),
/// sorted by label. A template `label → description` adds an implicit query
/// with the same ground truth; templates for labels absent from the scene are
/// skipped with a warning.
pub fn derive_queries(
    labels: &BTreeMap<u32, String>,
    implicit_templates: Option<&BTreeMap<String, String>>,
) -> Vec<QuerySpec> {
    let mut by_label: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for (part, label) in labels {
        by_label.entry(label.as_str()).or_default().push(*part);
    }
    let mut out: Vec<QuerySpec> = by_label
        .iter()
        .map(|(label, parts)| QuerySpec {
            query_text: label.to_string(),
            kind: QueryKind::Direct,
            gt_part_ids: parts.clone(),
        })
        .collect();
    if let Some(templates) = implicit_templates {
        for (label, text) in templates {
            match by_label.get(label.as_str()) {
                Some(parts) => out.push(QuerySpec {
                    query_text: text.clone(),
                    kind: QueryKind::Implicit,
                    gt_part_ids: parts.clone(),
                }),
                None => log::debug!("implicit template for `{label}` skipped: label not in scene"),
            }
        }
    }
    out
}

/// Reads an implicit-template file: a JSON object mapping labels to text.
pub fn load_templates(path: &Path) -> Result<BTreeMap<String, String>> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_chairs_sixteen_legs() {
        let mut labels = BTreeMap::new();
        let mut id = 1;
        for _ in 0..4 {
            labels.insert(id, "chair_seat".to_string());
            id += 1;
            for _ in 0..4 {
                labels.insert(id, "chair_leg".to_string());
                id += 1;
            }
        }
        let q = derive_queries(&labels, None);
        let legs = q.iter().find(|q| q.query_text == "chair_leg").unwrap();
        assert_eq!(legs.gt_part_ids.len(), 16);
        assert_eq!(legs.kind, QueryKind::Direct);
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn implicit_template_follows_label_presence() {
        let templates: BTreeMap<String, String> =
            [("door_handle".to_string(), "open the door".to_string())].into();
        let with_door: BTreeMap<u32, String> =
            [(1, "door_panel".to_string()), (2, "door_handle".to_string())].into();
        let q = derive_queries(&with_door, Some(&templates));
        let imp: Vec<_> = q.iter().filter(|q| q.kind == QueryKind::Implicit).collect();
        assert_eq!(imp.len(), 1);
        assert_eq!(imp[0].query_text, "open the door");
        assert_eq!(imp[0].gt_part_ids, vec![2]);

        let no_door: BTreeMap<u32, String> = [(1, "table_top".to_string())].into();
        let q = derive_queries(&no_door, Some(&templates));
        assert!(q.iter().all(|q| q.kind == QueryKind::Direct));
    }
}
