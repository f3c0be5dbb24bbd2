//! External tools (codecs, noise suppression, packet-loss concealment)
//! invoked as subprocesses over WAV files.

use std::time::Duration;

use crate::error::{Error, Result};
use crate::model::Clip;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

/// A shell command template with `{in}` and `{out}` placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterCommand {
    pub template: String,
    pub timeout: Duration,
}

impl AdapterCommand {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        if !template.contains("{in}") || !template.contains("{out}") {
            return Err(Error::Invalid(format!(
                "adapter template `{template}` must contain {{in}} and {{out}}"
            )));
        }
        Ok(AdapterCommand {
            template,
            timeout: DEFAULT_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[cfg(not(target_family = "wasm"))]
mod host {
    use std::io::Read;
    use std::process::{Command, Stdio};
    use std::thread;

    use wait_timeout::ChildExt;

    use super::AdapterCommand;
    use crate::error::{Error, Result};
    use crate::io::{load_audio, save_audio};
    use crate::model::Clip;

    fn shell_quote(s: &str) -> String {
        format!("'{}'", s.replace('\'', r"'\''"))
    }

    fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
        thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = r.read_to_end(&mut buf);
            String::from_utf8_lossy(&buf).into_owned()
        })
    }

    fn kill_tree(child: &mut std::process::Child) {
        #[cfg(unix)]
        // SAFETY: plain syscall on the process group we created.
        unsafe {
            libc::kill(-(child.id() as i32), libc::SIGKILL);
        }
        let _ = child.kill();
    }

    pub(super) fn run(clip: &Clip, adapter: &AdapterCommand) -> Result<Clip> {
        let dir = tempfile::Builder::new()
            .prefix("mosbench-adapter")
            .tempdir()
            .map_err(|e| Error::io(std::env::temp_dir(), e))?;
        let input = dir.path().join("in.wav");
        let output = dir.path().join("out.wav");
        save_audio(clip, &input)?;

        let command = adapter
            .template
            .replace("{in}", &shell_quote(&input.to_string_lossy()))
            .replace("{out}", &shell_quote(&output.to_string_lossy()));
        let fail = |reason: String, diagnostics: String| Error::Adapter {
            command: command.clone(),
            reason,
            diagnostics,
        };

        let mut cmd = Command::new("sh");
        cmd.arg("-c").arg(&command);
        // Own process group, so a timeout can take down the whole pipeline.
        #[cfg(unix)]
        std::os::unix::process::CommandExt::process_group(&mut cmd, 0);
        let mut child = cmd
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| fail(format!("could not start: {e}"), String::new()))?;
        let out = drain(child.stdout.take().expect("piped stdout"));
        let err = drain(child.stderr.take().expect("piped stderr"));

        let status = match child.wait_timeout(adapter.timeout) {
            Ok(Some(status)) => status,
            Ok(None) => {
                kill_tree(&mut child);
                let _ = child.wait();
                let diagnostics = format!(
                    "{}{}",
                    out.join().unwrap_or_default(),
                    err.join().unwrap_or_default()
                );
                return Err(fail(
                    format!("timed out after {:.1} s", adapter.timeout.as_secs_f64()),
                    diagnostics,
                ));
            }
            Err(e) => return Err(fail(format!("wait failed: {e}"), String::new())),
        };
        let diagnostics = format!(
            "{}{}",
            out.join().unwrap_or_default(),
            err.join().unwrap_or_default()
        );
        if !status.success() {
            return Err(fail(format!("exited with {status}"), diagnostics));
        }
        let produced = load_audio(&output)
            .map_err(|e| fail(format!("unreadable output: {e}"), diagnostics.clone()))?;
        Ok(Clip {
            clip_id: clip.clip_id.clone(),
            dataset: clip.dataset.clone(),
            sample_rate: produced.sample_rate,
            samples: produced.samples,
        })
    }
}

/// Writes the clip to a private temporary directory, runs the adapter and
/// loads its output. The returned clip keeps the input's id and dataset but
/// reports whatever sample rate the tool produced.
pub fn run_external_adapter(clip: &Clip, adapter: &AdapterCommand) -> Result<Clip> {
    #[cfg(not(target_family = "wasm"))]
    return host::run(clip, adapter);
    #[cfg(target_family = "wasm")]
    {
        let _ = clip;
        Err(Error::Adapter {
            command: adapter.template.clone(),
            reason: "external processes are not available on this target".into(),
            diagnostics: String::new(),
        })
    }
}
