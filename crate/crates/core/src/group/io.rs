use serde::{Deserialize, Serialize};

use super::perm::{close_permutations, Permutation};
use super::{GroupError, GroupTable};

/// On-disk group description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum GroupFile {
    Cayley {
        order: usize,
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    Perm {
        degree: usize,
        generators: Vec<Permutation>,
    },
}

impl GroupFile {
    pub fn from_table(g: &GroupTable) -> GroupFile {
        GroupFile::Cayley { order: g.order(), table: g.rows(), names: g.names().map(<[String]>::to_vec) }
    }

    pub fn into_table(self) -> Result<GroupTable, GroupError> {
        match self {
            GroupFile::Cayley { order, table, names } => {
                if table.len() != order {
                    return Err(GroupError::NotSquare { row: table.len(), len: table.len(), expected: order });
                }
                let g = GroupTable::validate(&table)?;
                match names {
                    Some(names) => g.with_names(names),
                    None => Ok(g),
                }
            }
            GroupFile::Perm { degree, generators } => close_permutations(degree, &generators),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_formats() {
        let c: GroupFile = serde_json::from_str(r#"{"format":"cayley","order":2,"table":[[0,1],[1,0]]}"#).unwrap();
        assert_eq!(c.into_table().unwrap().order(), 2);
        let p: GroupFile =
            serde_json::from_str(r#"{"format":"perm","degree":3,"generators":[[1,0,2],[1,2,0]]}"#).unwrap();
        assert_eq!(p.into_table().unwrap().order(), 6);
    }

    #[test]
    fn cayley_round_trip() {
        let g = crate::group::quaternion8().unwrap();
        let text = serde_json::to_string(&GroupFile::from_table(&g)).unwrap();
        let back: GroupFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_table().unwrap(), g);
    }
}
