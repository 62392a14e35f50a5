use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{Duration, Instant};

use crate::classifier::{Classifier, Label};
use crate::error::{Error, Result};
use crate::tabular::{check_arity, Entity, Value};

/// Environment variable bounding each batch call, in milliseconds.
pub const TIMEOUT_ENV: &str = "CE_ORACLE_TIMEOUT_MS";
pub const DEFAULT_TIMEOUT_MS: u64 = 60_000;

/// A classifier implemented by an external executable.
///
/// Each batch is written to the child's stdin as CSV (header = feature names,
/// one probe per line); the child answers with one `0`/`1` per line on
/// stdout, in order. Labels are cached by value tuple, and the child is only
/// started for tuples not seen before.
pub struct ExternalOracle {
    program: String,
    args: Vec<String>,
    features: Vec<String>,
    timeout: Duration,
    cache: RwLock<HashMap<Entity, Label>>,
    // one child process at a time
    process: Mutex<()>,
    invocations: AtomicU64,
}

impl ExternalOracle {
    /// Build an oracle; the timeout is read from `CE_ORACLE_TIMEOUT_MS`.
    pub fn new(program: impl Into<String>, args: Vec<String>, features: Vec<String>) -> Result<Self> {
        let timeout_ms = match std::env::var(TIMEOUT_ENV) {
            Ok(raw) => raw.trim().parse::<u64>().map_err(|_| {
                Error::Precondition(format!("{TIMEOUT_ENV} must be a number of milliseconds, got `{raw}`"))
            })?,
            Err(_) => DEFAULT_TIMEOUT_MS,
        };
        Ok(Self::with_timeout(program, args, features, Duration::from_millis(timeout_ms)))
    }

    pub fn with_timeout(
        program: impl Into<String>,
        args: Vec<String>,
        features: Vec<String>,
        timeout: Duration,
    ) -> Self {
        ExternalOracle {
            program: program.into(),
            args,
            features,
            timeout,
            cache: RwLock::new(HashMap::new()),
            process: Mutex::new(()),
            invocations: AtomicU64::new(0),
        }
    }

    /// Number of times the executable has been started.
    pub fn invocations(&self) -> u64 {
        self.invocations.load(Ordering::Relaxed)
    }

    pub fn cached(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    fn missing(&self, entities: &[Entity]) -> Vec<Entity> {
        let cache = self.cache.read().expect("oracle cache poisoned");
        let mut seen = HashSet::new();
        entities
            .iter()
            .filter(|e| !cache.contains_key(*e) && seen.insert(*e))
            .cloned()
            .collect()
    }

    fn run_batch(&self, batch: &[Entity]) -> Result<Vec<Label>> {
        let mut input = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut input);
            w.write_record(&self.features)?;
            for e in batch {
                w.write_record(e.values().iter().map(Value::to_string))?;
            }
            w.flush()?;
        }

        self.invocations.fetch_add(1, Ordering::Relaxed);
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Oracle(format!("cannot start `{}`: {e}", self.program)))?;

        let mut stdin = child.stdin.take().expect("stdin piped");
        let writer = std::thread::spawn(move || {
            // A child that exits early closes the pipe; the exit status reports that.
            let _ = stdin.write_all(&input);
        });
        let mut stdout = child.stdout.take().expect("stdout piped");
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            stdout.read_to_string(&mut out).map(|_| out)
        });
        let mut stderr = child.stderr.take().expect("stderr piped");
        let err_reader = std::thread::spawn(move || {
            let mut out = String::new();
            let _ = stderr.read_to_string(&mut out);
            out
        });

        let deadline = Instant::now() + self.timeout;
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::OracleTimeout(self.timeout.as_millis() as u64));
            }
            std::thread::sleep(Duration::from_millis(1));
        };
        let _ = writer.join();
        let stdout = reader
            .join()
            .map_err(|_| Error::Oracle("stdout reader panicked".into()))?
            .map_err(|e| Error::Oracle(format!("reading oracle output: {e}")))?;
        let stderr = err_reader.join().unwrap_or_default();
        if !status.success() {
            return Err(Error::Oracle(format!(
                "`{}` exited with {status}: {}",
                self.program,
                stderr.trim()
            )));
        }

        let labels = stdout
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| match l {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::Oracle(format!("label `{other}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<Label>>>()?;
        if labels.len() != batch.len() {
            return Err(Error::Oracle(format!(
                "sent {} probes but received {} labels",
                batch.len(),
                labels.len()
            )));
        }
        Ok(labels)
    }
}

impl Classifier for ExternalOracle {
    fn name(&self) -> &str {
        &self.program
    }

    fn arity(&self) -> usize {
        self.features.len()
    }

    fn classify(&self, entity: &Entity) -> Result<Label> {
        Ok(self.classify_many(std::slice::from_ref(entity))?[0])
    }

    fn classify_many(&self, entities: &[Entity]) -> Result<Vec<Label>> {
        for e in entities {
            check_arity(self.features.len(), e.values())?;
        }
        if !self.missing(entities).is_empty() {
            let _guard = self.process.lock().expect("oracle process lock poisoned");
            // another caller may have filled the cache while we waited
            let batch = self.missing(entities);
            if !batch.is_empty() {
                let labels = self.run_batch(&batch)?;
                let mut cache = self.cache.write().expect("oracle cache poisoned");
                cache.extend(batch.into_iter().zip(labels));
            }
        }
        let cache = self.cache.read().expect("oracle cache poisoned");
        Ok(entities.iter().map(|e| cache[e]).collect())
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str) -> ExternalOracle {
        ExternalOracle::with_timeout(
            "sh",
            vec!["-c".into(), script.into()],
            vec!["a".into(), "b".into()],
            Duration::from_secs(20),
        )
    }

    const OR_SCRIPT: &str = "awk -F, 'NR>1 { print (($1 + $2) >= 1) ? 1 : 0 }'";

    #[test]
    fn batch_protocol_and_cache() {
        let l = sh(OR_SCRIPT);
        let probes = vec![Entity::ints(&[0, 0]), Entity::ints(&[1, 0]), Entity::ints(&[0, 0])];
        assert_eq!(l.classify_many(&probes).unwrap(), vec![0, 1, 0]);
        assert_eq!(l.invocations(), 1);
        assert_eq!(l.cached(), 2);
        assert_eq!(l.classify(&Entity::ints(&[1, 0])).unwrap(), 1);
        assert_eq!(l.invocations(), 1);
        assert_eq!(l.classify(&Entity::ints(&[1, 1])).unwrap(), 1);
        assert_eq!(l.invocations(), 2);
    }

    #[test]
    fn rejects_bad_output() {
        assert!(matches!(sh("cat > /dev/null; echo 2").classify(&Entity::ints(&[0, 0])), Err(Error::Oracle(_))));
        assert!(matches!(sh("cat > /dev/null; exit 3").classify(&Entity::ints(&[0, 0])), Err(Error::Oracle(_))));
        assert!(matches!(sh("cat > /dev/null").classify(&Entity::ints(&[0, 0])), Err(Error::Oracle(_))));
    }

    #[test]
    fn times_out() {
        let l = ExternalOracle::with_timeout(
            "sh",
            vec!["-c".into(), "sleep 5".into()],
            vec!["a".into()],
            Duration::from_millis(100),
        );
        assert!(matches!(l.classify(&Entity::ints(&[1])), Err(Error::OracleTimeout(100))));
    }
}
