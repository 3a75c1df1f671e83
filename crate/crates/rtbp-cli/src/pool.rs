//! A minimal scoped worker pool for `--jobs`.
//!
//! Tasks are indexed; results land in their input slot, so output order is
//! independent of scheduling.  With `jobs == 1` everything runs on the
//! calling thread, which keeps single-job runs trivially deterministic and
//! easy to debug.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Run `task(i)` for `i in 0..n` on up to `jobs` worker threads and return
/// the results in input order.  `task` must be deterministic per index; the
/// pool only affects wall-clock time, never artifact content.
pub fn run_indexed<T, F>(n: usize, jobs: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(n.max(1));
    if jobs <= 1 {
        return (0..n).map(&task).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = task(i);
                slots.lock().expect("pool mutex poisoned")[i] = Some(result);
            });
        }
    });

    slots
        .into_inner()
        .expect("pool mutex poisoned")
        .into_iter()
        .map(|slot| slot.expect("every task index must have produced a result"))
        .collect()
}
