//! Parallel map with ordered output and bounded memory.
//!
//! One reader thread pulls items from the input, N worker threads transform
//! them, and the calling thread receives the results in input order. A
//! permit window caps the number of items between the reader and the
//! consumer (in queues, in workers, or waiting to be reordered), so memory
//! stays bounded however long the input is. A panic while processing an
//! item is caught and reported for that item only.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::thread;

use crossbeam_channel::{bounded, unbounded};

/// Result of processing one item; `Err` carries a panic message.
pub type Outcome<O> = Result<O, String>;

/// Renders a panic payload.
pub fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic with a non-string payload".to_string()
    }
}

/// Runs `work` over `items` on `states.len()` threads (each owning one
/// state) and hands `(index, item, outcome)` to `sink` in input order.
///
/// `window` is the maximum number of items in flight. The first error
/// returned by `sink` stops the run and is returned.
pub fn process_ordered<I, T, W, O, F, S, E>(
    items: I,
    states: Vec<W>,
    window: usize,
    work: F,
    mut sink: S,
) -> Result<(), E>
where
    I: Iterator<Item = T> + Send,
    T: Send,
    W: Send,
    O: Send,
    F: Fn(&mut W, &T) -> O + Sync,
    S: FnMut(u64, T, Outcome<O>) -> Result<(), E>,
{
    assert!(!states.is_empty(), "at least one worker");
    let window = window.max(1);
    let (permit_tx, permit_rx) = bounded::<()>(window);
    for _ in 0..window {
        permit_tx.send(()).expect("fresh channel has room");
    }
    let (work_tx, work_rx) = bounded::<(u64, T)>(window);
    let (done_tx, done_rx) = unbounded::<(u64, T, Outcome<O>)>();
    let work = &work;

    thread::scope(|scope| {
        scope.spawn(move || {
            for (seq, item) in (0u64..).zip(items) {
                if permit_rx.recv().is_err() || work_tx.send((seq, item)).is_err() {
                    break;
                }
            }
        });
        for mut state in states {
            let work_rx = work_rx.clone();
            let done_tx = done_tx.clone();
            scope.spawn(move || {
                for (seq, item) in work_rx.iter() {
                    let outcome = catch_unwind(AssertUnwindSafe(|| work(&mut state, &item)))
                        .map_err(|p| panic_message(p.as_ref()));
                    if done_tx.send((seq, item, outcome)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(work_rx);
        drop(done_tx);
        // Owned here so that an early return drops them, which unblocks the
        // reader and the workers before the scope joins them.
        let permit_tx = permit_tx;
        let done_rx = done_rx;

        let mut pending: BTreeMap<u64, (T, Outcome<O>)> = BTreeMap::new();
        let mut next = 0u64;
        for (seq, item, outcome) in done_rx.iter() {
            pending.insert(seq, (item, outcome));
            while let Some((item, outcome)) = pending.remove(&next) {
                sink(next, item, outcome)?;
                next += 1;
                // The reader may already be gone; a closed channel is fine.
                let _ = permit_tx.send(());
            }
        }
        debug_assert!(pending.is_empty());
        Ok(())
    })
}
