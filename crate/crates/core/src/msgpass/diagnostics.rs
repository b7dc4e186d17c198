use std::io::Write;

/// Numerical events counted during a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Check messages whose product vanished and were reset to uniform.
    pub annihilations: u64,
    /// Variable messages or marginals that collapsed to zero and were floored.
    pub collapses: u64,
    /// Checks where transform-domain division fell back to prefix/suffix.
    pub division_fallbacks: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.annihilations += other.annihilations;
        self.collapses += other.collapses;
        self.division_fallbacks += other.division_fallbacks;
    }
}

/// Summary of one full sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepStats {
    pub trial: usize,
    pub sweep: usize,
    pub gamma: f64,
    /// Largest absolute change of any check-to-variable entry.
    pub max_delta: f64,
    pub unsat_checks: usize,
    /// Mean marginal entropy in bits per binary digit.
    pub entropy_proxy: f64,
}

pub trait SweepObserver {
    fn on_sweep(&mut self, stats: &SweepStats);
}

impl<F: FnMut(&SweepStats)> SweepObserver for F {
    fn on_sweep(&mut self, stats: &SweepStats) {
        self(stats)
    }
}

/// Streams sweep statistics as CSV:
/// `trial,sweep,gamma,max_delta,unsat_checks,entropy_proxy`.
pub struct CsvDiagnostics<W: Write> {
    out: W,
    header_written: bool,
    error: Option<std::io::Error>,
}

impl<W: Write> CsvDiagnostics<W> {
    pub const HEADER: &'static str = "trial,sweep,gamma,max_delta,unsat_checks,entropy_proxy";

    pub fn new(out: W) -> Self {
        Self {
            out,
            header_written: false,
            error: None,
        }
    }

    /// Returns the writer, or the first I/O error hit while streaming.
    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        if !self.header_written {
            writeln!(self.out, "{}", Self::HEADER)?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> SweepObserver for CsvDiagnostics<W> {
    fn on_sweep(&mut self, s: &SweepStats) {
        if self.error.is_some() {
            return;
        }
        let mut write = || -> std::io::Result<()> {
            if !self.header_written {
                writeln!(self.out, "{}", Self::HEADER)?;
                self.header_written = true;
            }
            writeln!(
                self.out,
                "{},{},{},{:e},{},{}",
                s.trial, s.sweep, s.gamma, s.max_delta, s.unsat_checks, s.entropy_proxy
            )
        };
        if let Err(e) = write() {
            self.error = Some(e);
        }
    }
}
