use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowIssue};
use crate::regression::{OperatorId, OperatorRecord};

/// Weld type a cohort is defined by. Textual form is
/// `schedule,size,material,weldtype`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeldTypeKey {
    pub pipe_schedule: String,
    pub nominal_pipe_size: String,
    pub material_type: String,
    pub weld_type: String,
}

impl WeldTypeKey {
    pub fn new(schedule: &str, size: &str, material: &str, weld_type: &str) -> Result<Self> {
        let fields = [schedule, size, material, weld_type].map(str::trim);
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::InvalidConfig(format!(
                "weld type fields must be nonempty, got ({})",
                fields.join(",")
            )));
        }
        let [pipe_schedule, nominal_pipe_size, material_type, weld_type] = fields.map(str::to_owned);
        Ok(Self {
            pipe_schedule,
            nominal_pipe_size,
            material_type,
            weld_type,
        })
    }

    /// Group used when the input carries no weld-type columns.
    pub fn all() -> Self {
        Self::new("ALL", "ALL", "ALL", "ALL").expect("nonempty")
    }
}

impl fmt::Display for WeldTypeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.pipe_schedule, self.nominal_pipe_size, self.material_type, self.weld_type
        )
    }
}

impl FromStr for WeldTypeKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        match parts.as_slice() {
            [schedule, size, material, weld] => Self::new(schedule, size, material, weld),
            _ => Err(Error::InvalidConfig(format!(
                "group must be `schedule,size,material,weldtype`, got `{s}`"
            ))),
        }
    }
}

/// Column names looked up in the header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaOptions {
    pub operator_id: String,
    pub total_welds: String,
    pub repaired_welds: String,
    pub pipe_schedule: String,
    pub nominal_pipe_size: String,
    pub material_type: String,
    pub weld_type: String,
}

impl Default for SchemaOptions {
    fn default() -> Self {
        Self {
            operator_id: "operator_id".into(),
            total_welds: "total_welds".into(),
            repaired_welds: "repaired_welds".into(),
            pipe_schedule: "pipe_schedule".into(),
            nominal_pipe_size: "nominal_pipe_size".into(),
            material_type: "material_type".into(),
            weld_type: "weld_type".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    pub line: u64,
    pub operator_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergedRow {
    pub line: u64,
    pub group: String,
    pub operator_id: OperatorId,
}

/// Where the records came from and what happened to every data row.
/// `rows_accepted + rows_merged + rows_rejected == rows_read`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rows_merged: usize,
    pub rows_rejected: usize,
    pub rejected: Vec<RejectedRow>,
    pub merged: Vec<MergedRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InspectionDataset {
    /// Records per weld type, sorted by operator id; ids are unique per group.
    pub groups: BTreeMap<WeldTypeKey, Vec<OperatorRecord>>,
    pub provenance: Provenance,
}

impl InspectionDataset {
    pub fn group(&self, key: &WeldTypeKey) -> Result<&[OperatorRecord]> {
        self.groups
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownGroup(key.to_string()))
    }

    /// The requested group, or the only group when none is requested.
    pub fn resolve_group(&self, key: Option<&WeldTypeKey>) -> Result<WeldTypeKey> {
        match key {
            Some(k) => self.group(k).map(|_| k.clone()),
            None if self.groups.len() == 1 => Ok(self.groups.keys().next().expect("one").clone()),
            None => Err(Error::InvalidConfig(format!(
                "dataset has {} weld-type groups; choose one with --group ({})",
                self.groups.len(),
                self.groups
                    .keys()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" | ")
            ))),
        }
    }
}

pub fn ingest_csv(path: &Path, options: &SchemaOptions) -> Result<InspectionDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, &path.display().to_string(), options)
}

/// Parses inspection CSV: comma separated, header required, `#` comment
/// lines skipped. Rows with `n < 1` or `X` outside `[0, n]` are rejected into
/// the provenance log; duplicate `(group, operator)` rows are summed. Rows
/// whose counts are not integers fail the whole ingest with every offending
/// line listed.
pub fn ingest_reader<R: std::io::Read>(
    reader: R,
    source: &str,
    options: &SchemaOptions,
) -> Result<InspectionDataset> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let required = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_owned()));
    let id_col = required(&options.operator_id)?;
    let n_col = required(&options.total_welds)?;
    let x_col = required(&options.repaired_welds)?;

    let key_names = [
        &options.pipe_schedule,
        &options.nominal_pipe_size,
        &options.material_type,
        &options.weld_type,
    ];
    let key_cols: Vec<Option<usize>> = key_names.iter().map(|n| find(n)).collect();
    let key_cols: Option<[usize; 4]> = if key_cols.iter().all(Option::is_none) {
        None
    } else if let Some(missing) = key_names.iter().zip(&key_cols).find(|(_, c)| c.is_none()) {
        return Err(Error::MissingColumn(missing.0.to_string()));
    } else {
        Some(std::array::from_fn(|i| key_cols[i].expect("checked")))
    };

    let mut groups: BTreeMap<WeldTypeKey, Vec<OperatorRecord>> = BTreeMap::new();
    let mut provenance = Provenance {
        source: source.to_owned(),
        rows_read: 0,
        rows_accepted: 0,
        rows_merged: 0,
        rows_rejected: 0,
        rejected: Vec::new(),
        merged: Vec::new(),
    };
    let mut unparseable = Vec::new();

    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        provenance.rows_read += 1;
        let field = |i: usize| row.get(i).unwrap_or("");
        let id = field(id_col);

        let parse = |i: usize, name: &str| {
            field(i).parse::<i64>().map_err(|_| RowIssue {
                line,
                message: format!("{name} `{}` is not an integer", field(i)),
            })
        };
        if id.is_empty() {
            unparseable.push(RowIssue {
                line,
                message: "empty operator id".into(),
            });
            continue;
        }
        let (n, x) = match (parse(n_col, &options.total_welds), parse(x_col, &options.repaired_welds)) {
            (Ok(n), Ok(x)) => (n, x),
            (n, x) => {
                unparseable.extend(n.err());
                unparseable.extend(x.err());
                continue;
            }
        };

        let mut reject = |reason: String| {
            provenance.rows_rejected += 1;
            provenance.rejected.push(RejectedRow {
                line,
                operator_id: id.to_owned(),
                reason,
            });
        };
        if n < 1 {
            reject(format!("total welds {n} < 1"));
            continue;
        }
        if x < 0 || x > n {
            reject(format!("repaired welds {x} outside [0, {n}]"));
            continue;
        }
        let key = match key_cols {
            None => WeldTypeKey::all(),
            Some([s, z, m, w]) => match WeldTypeKey::new(field(s), field(z), field(m), field(w)) {
                Ok(k) => k,
                Err(_) => {
                    reject("blank weld-type field".into());
                    continue;
                }
            },
        };

        let operator_id = OperatorId::new(id);
        let records = groups.entry(key.clone()).or_default();
        if let Some(existing) = records.iter_mut().find(|r| r.operator_id == operator_id) {
            existing.n_total += n as u64;
            existing.x_repaired += x as u64;
            provenance.rows_merged += 1;
            provenance.merged.push(MergedRow {
                line,
                group: key.to_string(),
                operator_id,
            });
        } else {
            records.push(OperatorRecord {
                operator_id,
                n_total: n as u64,
                x_repaired: x as u64,
            });
            provenance.rows_accepted += 1;
        }
    }

    if !unparseable.is_empty() {
        return Err(Error::UnparseableRow(unparseable));
    }
    if groups.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for records in groups.values_mut() {
        records.sort_by(|p, q| p.operator_id.cmp(&q.operator_id));
    }
    Ok(InspectionDataset { groups, provenance })
}
