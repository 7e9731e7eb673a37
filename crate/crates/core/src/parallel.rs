//! Minimal scoped-thread fan-out for independent jobs.

/// Apply `f` to 0..n with at most `threads` worker threads and return the
/// results in index order. Jobs must be independent; results are deterministic
/// regardless of scheduling because each index writes only its own slot.
pub(crate) fn parallel_map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (ci, slots) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(f(ci * chunk + k));
                }
            });
        }
    });
    out.into_iter()
        .map(|v| v.expect("every index filled by its worker"))
        .collect()
}
