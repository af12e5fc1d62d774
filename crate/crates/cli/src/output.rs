//! CSV and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sfbm_core::SamplePath;

use crate::config::CsvMode;
use crate::error::CliError;
use crate::experiments::RunOutput;

pub const REPORT_FILE: &str = "report.txt";

/// `time,value` rows of one path.
pub fn path_csv(path: &SamplePath) -> String {
    let mut out = String::from("time,value\n");
    for (t, v) in path.times().iter().zip(path.values()) {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

/// One `time` column and one `value_<i>` column per path; all paths share a grid.
pub fn wide_csv(paths: &[SamplePath]) -> Result<String, CliError> {
    let Some(first) = paths.first() else {
        return Ok(String::from("time\n"));
    };
    for p in &paths[1..] {
        first.check_same_grid(p)?;
    }
    let mut out = String::from("time");
    for i in 0..paths.len() {
        let _ = write!(out, ",value_{i}");
    }
    out.push('\n');
    for (j, t) in first.times().iter().enumerate() {
        let _ = write!(out, "{t}");
        for p in paths {
            let _ = write!(out, ",{}", p.values()[j]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// `(file name, contents)` of every CSV artifact.
pub fn csv_files(mode: CsvMode, paths: &[SamplePath]) -> Result<Vec<(String, String)>, CliError> {
    Ok(match mode {
        CsvMode::None => Vec::new(),
        _ if paths.is_empty() => Vec::new(),
        CsvMode::Wide => vec![("paths.csv".to_string(), wide_csv(paths)?)],
        CsvMode::PerPath => paths
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("path_{i:04}.csv"), path_csv(p)))
            .collect(),
    })
}

/// Writes CSVs and the report into `dir`, recording the artifact list in the report.
pub fn write_outputs(dir: &Path, output: &mut RunOutput, mode: CsvMode) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let files = csv_files(mode, &output.paths)?;
    output.report.artifacts = files.iter().map(|(n, _)| n.clone()).collect();
    output.report.artifacts.push(REPORT_FILE.to_string());
    for (name, body) in &files {
        fs::write(dir.join(name), body)?;
    }
    fs::write(dir.join(REPORT_FILE), output.report.render())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layouts() {
        let a = SamplePath::uniform(0.5, vec![1.0, 2.0, 3.0]).unwrap();
        let b = a.map(|v| -v);
        assert_eq!(path_csv(&a), "time,value\n0,1\n0.5,2\n1,3\n");
        assert_eq!(
            wide_csv(&[a.clone(), b]).unwrap(),
            "time,value_0,value_1\n0,1,-1\n0.5,2,-2\n1,3,-3\n"
        );
        let files = csv_files(CsvMode::PerPath, &[a.clone(), a.clone()]).unwrap();
        assert_eq!(files[1].0, "path_0001.csv");
        assert!(csv_files(CsvMode::None, &[a]).unwrap().is_empty());
    }
}
