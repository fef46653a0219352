pub mod simulate;
pub mod trajgen;
pub mod verify;

use std::path::{Path, PathBuf};

use crate::{EXIT_OK, EXIT_RUNTIME_ERROR};

/// Run one scenario per config file; multiple configs execute on a worker
/// pool of scoped threads, each isolated in its own output directory. The
/// returned status is the worst across scenarios.
pub fn run_many<F>(configs: Vec<PathBuf>, runner: F) -> u8
where
    F: Fn(&Path) -> u8 + Sync,
{
    if configs.len() == 1 {
        return runner(&configs[0]);
    }
    let statuses = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for path in &configs {
            let statuses = &statuses;
            let runner = &runner;
            scope.spawn(move || {
                let s = runner(path);
                statuses.lock().expect("no poisoned lock").push(s);
            });
        }
    });
    let worst = statuses
        .lock()
        .expect("no poisoned lock")
        .iter()
        .copied()
        .max();
    worst.unwrap_or(EXIT_OK)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), u8> {
    std::fs::create_dir_all(dir).map_err(|e| {
        eprintln!(
            "error: cannot create output directory {}: {e}",
            dir.display()
        );
        EXIT_RUNTIME_ERROR
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), u8> {
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_RUNTIME_ERROR
    })
}
