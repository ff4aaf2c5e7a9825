//! Input discovery: media folder scans and tab-separated text tables.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::config::{ColumnSpec, Modality, Source};
use crate::error::{DataError, IoError, PipelineError};

/// One media file keyed by its stem.
#[derive(Clone, Debug, PartialEq)]
pub struct MediaEntry {
    pub id: String,
    pub path: PathBuf,
}

/// One (item, text) row.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemRow {
    pub item: String,
    pub text: String,
}

/// One (user, item, text) row.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionRow {
    pub user: String,
    pub item: String,
    pub text: String,
}

/// Rows of a textual input table, in source order.
#[derive(Clone, Debug, PartialEq)]
pub enum TextTable {
    Items(Vec<ItemRow>),
    Interactions(Vec<InteractionRow>),
}

fn check_id(id: &str) -> Result<(), DataError> {
    if id.is_empty() || id.contains('/') || id.contains('\\') || id.contains("__") {
        return Err(DataError::InvalidId { id: id.to_string() });
    }
    Ok(())
}

fn media_extensions(modality: Modality) -> &'static [&'static str] {
    match modality {
        Modality::Visual => &["ppm", "pgm", "png"],
        Modality::Audio => &["wav"],
        Modality::Textual => unreachable!("textual input is a table, not a folder"),
    }
}

/// Scans `dir` for media files of `modality`, keyed by file stem and
/// sorted by id. Non-media files are reported as warnings, not errors.
pub fn scan_media_folder(
    dir: &Path,
    modality: Modality,
) -> Result<(Vec<MediaEntry>, Vec<String>), PipelineError> {
    let extensions = media_extensions(modality);
    if !dir.is_dir() {
        return Err(DataError::MissingInput {
            path: dir.to_path_buf(),
        }
        .into());
    }
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let read = std::fs::read_dir(dir).map_err(|e| IoError::new(dir, e))?;
    for entry in read {
        let entry = entry.map_err(|e| IoError::new(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            continue;
        }
        let matched = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| extensions.iter().any(|x| e.eq_ignore_ascii_case(x)))
            .unwrap_or(false);
        if !matched {
            warnings.push(format!(
                "ignoring unsupported file: {}",
                path.file_name().unwrap_or_default().to_string_lossy()
            ));
            continue;
        }
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        check_id(&id)?;
        entries.push(MediaEntry { id, path });
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in entries.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(DataError::DuplicateId {
                id: pair[0].id.clone(),
                context: format!("{}", dir.display()),
            }
            .into());
        }
    }
    Ok((entries, warnings))
}

/// Loads a tab-separated table. With `columns`, row one is a header and
/// fields are located by exact column name; without, fields are
/// positional (items: id first, text last; interactions: user, item,
/// text last) and every row is data. Rows keep source order.
pub fn load_text_table(
    path: &Path,
    source: Source,
    columns: Option<&ColumnSpec>,
) -> Result<TextTable, PipelineError> {
    let raw = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            PipelineError::from(DataError::MissingInput {
                path: path.to_path_buf(),
            })
        } else {
            IoError::new(path, e).into()
        }
    })?;
    let mut lines: Vec<&str> = raw.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    if lines.last() == Some(&"") {
        lines.pop(); // trailing newline, not an empty row
    }

    // (row number, fields) with 1-based numbering over the whole file.
    let mut rows = lines
        .iter()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split('\t').collect::<Vec<&str>>()));

    match source {
        Source::Items => {
            let pick = make_picker(
                &mut rows,
                columns.map(|c| match c {
                    ColumnSpec::Items { item, text } => vec![item.as_str(), text.as_str()],
                    ColumnSpec::Interactions { .. } => {
                        unreachable!("items job cannot carry interaction columns")
                    }
                }),
                1,
            )?;
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            for (row, fields) in rows {
                let got = pick.extract(row, &fields)?;
                let item = got[0].to_string();
                let text = got[1].to_string();
                check_id(&item)?;
                if !seen.insert(item.clone()) {
                    return Err(DataError::DuplicateId {
                        id: item,
                        context: "items table".into(),
                    }
                    .into());
                }
                out.push(ItemRow { item, text });
            }
            Ok(TextTable::Items(out))
        }
        Source::Interactions => {
            let pick = make_picker(
                &mut rows,
                columns.map(|c| match c {
                    ColumnSpec::Interactions { user, item, text } => {
                        vec![user.as_str(), item.as_str(), text.as_str()]
                    }
                    ColumnSpec::Items { .. } => {
                        unreachable!("interactions job cannot carry item columns")
                    }
                }),
                2,
            )?;
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            for (row, fields) in rows {
                let got = pick.extract(row, &fields)?;
                let user = got[0].to_string();
                let item = got[1].to_string();
                let text = got[2].to_string();
                check_id(&user)?;
                check_id(&item)?;
                if !seen.insert((user.clone(), item.clone())) {
                    return Err(DataError::DuplicateId {
                        id: format!("{user}__{item}"),
                        context: "interaction pairs".into(),
                    }
                    .into());
                }
                out.push(InteractionRow { user, item, text });
            }
            Ok(TextTable::Interactions(out))
        }
    }
}

/// Field picker for one table: named indices from a consumed header row,
/// or positional (`key_count` leading key fields plus text from the last
/// field).
enum Picker {
    Named(Vec<usize>),
    Positional(usize),
}

fn make_picker(
    rows: &mut dyn Iterator<Item = (usize, Vec<&str>)>,
    names: Option<Vec<&str>>,
    key_count: usize,
) -> Result<Picker, DataError> {
    match names {
        Some(names) => {
            let (_, header) = rows.next().ok_or(DataError::ShortRow {
                row: 1,
                expected: names.len(),
                found: 0,
            })?;
            let mut indices = Vec::with_capacity(names.len());
            for name in names {
                let idx = header.iter().position(|h| *h == name).ok_or_else(|| {
                    DataError::MissingColumn {
                        column: name.to_string(),
                    }
                })?;
                indices.push(idx);
            }
            Ok(Picker::Named(indices))
        }
        None => Ok(Picker::Positional(key_count)),
    }
}

impl Picker {
    fn extract<'a>(&self, row: usize, fields: &[&'a str]) -> Result<Vec<&'a str>, DataError> {
        match self {
            Picker::Named(indices) => {
                let need = indices.iter().max().copied().unwrap_or(0) + 1;
                if fields.len() < need {
                    return Err(DataError::ShortRow {
                        row,
                        expected: need,
                        found: fields.len(),
                    });
                }
                Ok(indices.iter().map(|&i| fields[i]).collect())
            }
            Picker::Positional(keys) => {
                if fields.len() < *keys + 1 {
                    return Err(DataError::ShortRow {
                        row,
                        expected: keys + 1,
                        found: fields.len(),
                    });
                }
                let mut out: Vec<&str> = fields[..*keys].to_vec();
                out.push(fields[fields.len() - 1]);
                Ok(out)
            }
        }
    }
}
