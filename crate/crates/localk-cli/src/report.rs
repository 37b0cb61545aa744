//! Run reports: deterministic text or JSON, one section per certificate group.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Section {
    pub name: String,
    pub values: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section { name: name.into(), ..Default::default() }
    }

    pub fn value(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.values.push((key.into(), value.to_string()));
        self
    }

    pub fn check(&mut self, name: impl Into<String>, residual: Option<String>) -> &mut Self {
        self.checks.push(Check { name: name.into(), passed: residual.is_none(), residual });
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub sections: Vec<Section>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.into(), ..Default::default() }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.sections.iter().all(Section::passed);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.text(),
        }
    }

    fn text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        for (k, v) in &self.params {
            out += &format!("{k}: {v}\n");
        }
        for s in &self.sections {
            out += &format!("\n[{}]\n", s.name);
            for (k, v) in &s.values {
                out += &format!("  {k} = {v}\n");
            }
            for c in &s.checks {
                match &c.residual {
                    None => out += &format!("  PASS {}\n", c.name),
                    Some(r) => out += &format!("  FAIL {}: {r}\n", c.name),
                }
            }
        }
        out += &format!("\nresult: {}\n", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}
