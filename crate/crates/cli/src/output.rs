use clap::ValueEnum;
use serde::Serialize;

/// Floats go out in shortest round-trip form in JSON and CSV.
#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    numeric: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(header: I) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            numeric: Vec::new(),
        }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        self.rows.push(cells.into_iter().collect());
    }

    pub fn row_f64<I: IntoIterator<Item = f64>>(&mut self, cells: I) {
        let v: Vec<f64> = cells.into_iter().collect();
        self.rows.push(v.iter().map(f64::to_string).collect());
        self.numeric.push(v);
    }

    pub fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects keyed by the header; numeric rows stay numbers.
    pub fn json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                self.header
                    .iter()
                    .zip(r)
                    .enumerate()
                    .map(|(j, (h, cell))| {
                        let v = match self.numeric.get(i) {
                            Some(nums) => serde_json::json!(nums[j]),
                            None => serde_json::json!(cell),
                        };
                        (h.clone(), v)
                    })
                    .collect()
            })
            .collect();
        json(&rows)
    }

    pub fn text(&self) -> String {
        self.aligned(&self.rows)
    }

    /// Aligned text with numeric cells rounded for reading.
    pub fn text_rounded(&self, decimals: usize) -> String {
        let rows: Vec<Vec<String>> = self
            .numeric
            .iter()
            .map(|r| r.iter().map(|x| format!("{x:.decimals$}")).collect())
            .collect();
        self.aligned(&rows)
    }

    fn aligned(&self, rows: &[Vec<String>]) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| {
                rows.iter()
                    .map(|r| r[j].len())
                    .chain([self.header[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let mut s = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ");
            s.push('\n');
            s
        };
        let mut out = line(&self.header);
        for r in rows {
            out.push_str(&line(r));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Text if self.numeric.len() == self.rows.len() => self.text_rounded(6),
            Format::Text => self.text(),
        }
    }
}
