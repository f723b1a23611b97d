use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{ChargeDegree, DefendantRecord, Race, Sex};
use crate::{Error, Result};

pub(crate) const REQUIRED_COLUMNS: [&str; 11] = [
    "id",
    "age",
    "sex",
    "race",
    "priors_count",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "c_charge_degree",
    "is_recid",
    "two_year_recid",
];

/// Charge class as it appears in the source table, before filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawCharge {
    Felony,
    Misdemeanor,
    /// Ordinary traffic offenses and county/municipal ordinance violations.
    TrafficOrOrdinance,
}

/// A parsed row. Empty cells are `None`; the label is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 1-based data row number (header excluded).
    pub row: usize,
    pub id: Option<String>,
    pub age: Option<u32>,
    pub sex: Option<Sex>,
    pub race: Option<String>,
    pub priors_count: Option<u32>,
    pub juv_fel_count: Option<u32>,
    pub juv_misd_count: Option<u32>,
    pub juv_other_count: Option<u32>,
    pub charge: Option<RawCharge>,
    /// -1 marks a case without recidivism follow-up.
    pub is_recid: Option<i8>,
    pub two_year_recid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutput {
    pub records: Vec<RawRecord>,
    pub rejects: Vec<Reject>,
}

/// Per-rule removal counts. Rules are applied in field order and each
/// removed record is counted once, under the first rule it fails.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub incomplete: usize,
    pub traffic_or_ordinance: usize,
    pub race_out_of_scope: usize,
    pub underage: usize,
    pub kept: usize,
}

/// Parse a comma-separated table with a header row.
///
/// Fails only when a required column is absent from the header. Rows whose
/// fields cannot be parsed, or whose label is empty, are reported in
/// `rejects`.
pub fn parse_raw(csv_bytes: &[u8]) -> Result<ParseOutput> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(csv_bytes);

    let header: HashMap<String, usize> = reader
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, name)| (name.trim().to_string(), i))
        .collect();
    let mut columns = [0usize; REQUIRED_COLUMNS.len()];
    for (slot, name) in columns.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = *header.get(name).ok_or(Error::MissingColumn(name))?;
    }

    let mut out = ParseOutput::default();
    for (i, row) in reader.records().enumerate() {
        let row_number = i + 1;
        let parsed = row
            .map_err(|e| e.to_string())
            .and_then(|row| parse_row(row_number, &row, &columns));
        match parsed {
            Ok(record) => out.records.push(record),
            Err(reason) => out.rejects.push(Reject {
                row: row_number,
                reason,
            }),
        }
    }
    Ok(out)
}

fn parse_row(
    row_number: usize,
    row: &csv::StringRecord,
    columns: &[usize; REQUIRED_COLUMNS.len()],
) -> std::result::Result<RawRecord, String> {
    let cell = |k: usize| -> std::result::Result<Option<&str>, String> {
        let value = row
            .get(columns[k])
            .ok_or_else(|| format!("row has no `{}` field", REQUIRED_COLUMNS[k]))?
            .trim();
        Ok((!value.is_empty()).then_some(value))
    };
    let count = |k: usize| -> std::result::Result<Option<u32>, String> {
        cell(k)?
            .map(|v| {
                v.parse::<u32>()
                    .map_err(|_| format!("`{}` is not a count: {v:?}", REQUIRED_COLUMNS[k]))
            })
            .transpose()
    };

    let two_year_recid = match cell(10)? {
        None => return Err("label `two_year_recid` is empty".to_string()),
        Some("0") => false,
        Some("1") => true,
        Some(v) => return Err(format!("label `two_year_recid` is not 0/1: {v:?}")),
    };
    let sex = cell(2)?
        .map(|v| match v.to_ascii_lowercase().as_str() {
            "male" => Ok(Sex::Male),
            "female" => Ok(Sex::Female),
            _ => Err(format!("unknown sex {v:?}")),
        })
        .transpose()?;
    let charge = cell(8)?.map(parse_charge).transpose()?;
    let is_recid = cell(9)?
        .map(|v| match v {
            "-1" => Ok(-1),
            "0" => Ok(0),
            "1" => Ok(1),
            _ => Err(format!("`is_recid` is not -1/0/1: {v:?}")),
        })
        .transpose()?;

    Ok(RawRecord {
        row: row_number,
        id: cell(0)?.map(str::to_string),
        age: count(1)?,
        sex,
        race: cell(3)?.map(str::to_string),
        priors_count: count(4)?,
        juv_fel_count: count(5)?,
        juv_misd_count: count(6)?,
        juv_other_count: count(7)?,
        charge,
        is_recid,
        two_year_recid,
    })
}

/// Accepts the two-year file's single letters (`F`, `M`, `O`) as well as the
/// parenthesised degree codes of the full score table (`(F3)`, `(MO3)`, ...).
fn parse_charge(token: &str) -> std::result::Result<RawCharge, String> {
    let code = token
        .trim_start_matches('(')
        .trim_end_matches(')')
        .to_ascii_uppercase();
    if code.starts_with('F') {
        Ok(RawCharge::Felony)
    } else if code.starts_with("MO") {
        Ok(RawCharge::TrafficOrOrdinance)
    } else if code.starts_with('M') {
        Ok(RawCharge::Misdemeanor)
    } else if code == "O" || code.starts_with("CO") || code.starts_with("TC") || code.starts_with("CT") {
        Ok(RawCharge::TrafficOrOrdinance)
    } else {
        Err(format!("unknown charge degree {token:?}"))
    }
}

fn parse_race(race: &str) -> Option<Race> {
    match race {
        "African-American" | "African American" | "african_american" => Some(Race::AfricanAmerican),
        "Caucasian" | "White" | "white" => Some(Race::White),
        _ => None,
    }
}

/// Drop incomplete records, traffic/ordinance charges, races outside the
/// binary pair, and anyone under 18.
pub fn filter_records(records: &[RawRecord]) -> (Vec<DefendantRecord>, FilterReport) {
    let mut report = FilterReport {
        input: records.len(),
        ..FilterReport::default()
    };
    let mut kept = Vec::new();

    for raw in records {
        let complete = (|| {
            Some((
                raw.id.clone()?,
                raw.age?,
                raw.sex?,
                raw.race.as_deref()?,
                raw.priors_count?,
                raw.juv_fel_count?,
                raw.juv_misd_count?,
                raw.juv_other_count?,
                raw.charge?,
                raw.is_recid.filter(|&r| r >= 0)?,
            ))
        })();
        let Some((id, age, sex, race, priors, jf, jm, jo, charge, _)) = complete else {
            report.incomplete += 1;
            continue;
        };
        let charge_degree = match charge {
            RawCharge::Felony => ChargeDegree::Felony,
            RawCharge::Misdemeanor => ChargeDegree::Misdemeanor,
            RawCharge::TrafficOrOrdinance => {
                report.traffic_or_ordinance += 1;
                continue;
            }
        };
        let Some(race) = parse_race(race) else {
            report.race_out_of_scope += 1;
            continue;
        };
        if age < 18 {
            report.underage += 1;
            continue;
        }
        kept.push(DefendantRecord {
            id,
            age,
            sex,
            race,
            priors_count: priors,
            juv_fel_count: jf,
            juv_misd_count: jm,
            juv_other_count: jo,
            charge_degree,
            recidivated: raw.two_year_recid,
        });
    }
    report.kept = kept.len();
    (kept, report)
}
