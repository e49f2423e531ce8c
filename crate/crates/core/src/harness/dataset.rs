//! Dataset and simulation-profile ingestion.
//!
//! Both files are line-delimited JSON, UTF-8, one record per line. A
//! dataset line carries `id`, `prompt`, `gold`, and optional `metadata`;
//! a profile line is a full [`SimProblemProfile`]. Blank lines are
//! ignored. Parse and validation failures report the file and line.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::answer::Problem;
use crate::backend::SimProblemProfile;
use crate::error::{Error, Result};

/// A named problem set, optionally paired with simulation profiles.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub problems: Vec<Problem>,
    /// Present when the dataset will run against the simulated backend;
    /// then every problem id has a profile.
    pub sim_profiles: Option<BTreeMap<String, SimProblemProfile>>,
}

/// On-disk dataset record.
#[derive(Debug, Serialize, Deserialize)]
struct ProblemLine {
    id: String,
    prompt: String,
    gold: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

impl From<ProblemLine> for Problem {
    fn from(line: ProblemLine) -> Self {
        Problem {
            id: line.id,
            prompt: line.prompt,
            gold_answer: line.gold,
            metadata: line.metadata,
        }
    }
}

impl From<&Problem> for ProblemLine {
    fn from(p: &Problem) -> Self {
        ProblemLine {
            id: p.id.clone(),
            prompt: p.prompt.clone(),
            gold: p.gold_answer.clone(),
            metadata: p.metadata.clone(),
        }
    }
}

fn dataset_error(path: &Path, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Dataset {
        path: path.display().to_string(),
        line,
        message: message.to_string(),
    }
}

/// Parse every non-blank line of a file with `parse`, reporting failures
/// with their 1-based line number.
fn load_lines<T>(
    path: &Path,
    mut parse: impl FnMut(&str) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| dataset_error(path, 0, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| dataset_error(path, i + 1, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse(&line).map_err(|e| dataset_error(path, i + 1, e))?);
    }
    Ok(records)
}

/// Load and validate a dataset file. Duplicate ids and empty files are
/// rejected.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let problems: Vec<Problem> = load_lines(path, |line| {
        let record: ProblemLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let problem = Problem::from(record);
        problem.validate().map_err(|e| e.to_string())?;
        Ok(problem)
    })?;
    if problems.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut seen = std::collections::BTreeSet::new();
    for p in &problems {
        if !seen.insert(p.id.clone()) {
            return Err(Error::DuplicateId(p.id.clone()));
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Ok(Dataset {
        name,
        problems,
        sim_profiles: None,
    })
}

/// Load and validate a profile file. Duplicate ids are rejected.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<BTreeMap<String, SimProblemProfile>> {
    let path = path.as_ref();
    let profiles: Vec<SimProblemProfile> = load_lines(path, |line| {
        let profile: SimProblemProfile = serde_json::from_str(line).map_err(|e| e.to_string())?;
        profile.validate().map_err(|e| e.to_string())?;
        Ok(profile)
    })?;
    let mut map = BTreeMap::new();
    for p in profiles {
        let id = p.problem_id.clone();
        if map.insert(id.clone(), p).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    Ok(map)
}

impl Dataset {
    /// Attach simulation profiles, requiring one per problem. The error
    /// lists every missing id.
    pub fn with_profiles(mut self, profiles: BTreeMap<String, SimProblemProfile>) -> Result<Self> {
        let missing: Vec<&str> = self
            .problems
            .iter()
            .filter(|p| !profiles.contains_key(&p.id))
            .map(|p| p.id.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingProfiles(missing.join(", ")));
        }
        self.sim_profiles = Some(profiles);
        Ok(self)
    }

    pub fn from_parts(
        name: impl Into<String>,
        problems: Vec<Problem>,
        profiles: Vec<SimProblemProfile>,
    ) -> Result<Self> {
        let dataset = Dataset {
            name: name.into(),
            problems,
            sim_profiles: None,
        };
        dataset.with_profiles(profiles.into_iter().map(|p| (p.problem_id.clone(), p)).collect())
    }
}

/// Write a dataset as line-delimited JSON.
pub fn write_dataset(problems: &[Problem], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for p in problems {
        serde_json::to_writer(&mut out, &ProblemLine::from(p))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Write simulation profiles as line-delimited JSON.
pub fn write_profiles(profiles: &[SimProblemProfile], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for p in profiles {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
