//! Causal, bounded-memory footstep segmentation for live streams.
//!
//! Contacts are detected on the raw summed tactile signal against a
//! threshold derived from a sliding window, and the start of a contact is
//! located by looking back once its end is seen. Tactile channels of an
//! emitted footstep are drift-corrected with a running least-squares line
//! fitted to everything received so far, which converges to the whole-run
//! fit used offline.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::preprocess::{Contact, ContactMerger, SegmentationParams};
use crate::types::{FastFrame, FootstepSegment, SlowFrame};
use crate::TACTILE_CHANNELS;

/// Length of the sliding history kept for both streams.
pub const STREAM_WINDOW_S: f64 = 10.0;

/// Incremental least-squares line `x ~ a + b * i` over absolute sample index.
#[derive(Debug, Clone, Default)]
pub struct RunningLineFit {
    n: f64,
    si: f64,
    sii: f64,
    sx: f64,
    six: f64,
}

impl RunningLineFit {
    pub fn push(&mut self, i: usize, x: f64) {
        let i = i as f64;
        self.n += 1.0;
        self.si += i;
        self.sii += i * i;
        self.sx += x;
        self.six += i * x;
    }

    /// Current `(intercept, slope)`; a single point gives a flat line.
    pub fn line(&self) -> (f64, f64) {
        if self.n == 0.0 {
            return (0.0, 0.0);
        }
        let den = self.n * self.sii - self.si * self.si;
        if den <= 0.0 {
            return (self.sx / self.n, 0.0);
        }
        let slope = (self.n * self.six - self.si * self.sx) / den;
        ((self.sx - slope * self.si) / self.n, slope)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    index: usize,
    frame: SlowFrame,
    sum: f64,
}

/// Streaming segmenter. Feed slow frames with [`push_slow`](Self::push_slow)
/// and, between them, the fast frames that follow each slow frame in time.
#[derive(Debug, Clone)]
pub struct StreamSegmenter {
    params: SegmentationParams,
    merger: ContactMerger,
    fast_rate_hz: f64,
    slow_rate_hz: f64,
    slow_cap: usize,
    fast_cap: usize,
    window: VecDeque<Entry>,
    fast: VecDeque<FastFrame>,
    fits: [RunningLineFit; TACTILE_CHANNELS],
    pending: Option<Contact>,
    next_index: usize,
    dropped: usize,
}

impl StreamSegmenter {
    pub fn new(params: SegmentationParams, fast_rate_hz: f64, slow_rate_hz: f64) -> Self {
        let merger = ContactMerger::new(&params, slow_rate_hz);
        let slow_cap = libm::ceil(STREAM_WINDOW_S * slow_rate_hz) as usize;
        let fast_cap = libm::ceil(STREAM_WINDOW_S * fast_rate_hz) as usize;
        Self {
            params,
            merger,
            fast_rate_hz,
            slow_rate_hz,
            slow_cap,
            fast_cap,
            window: VecDeque::with_capacity(slow_cap),
            fast: VecDeque::with_capacity(fast_cap),
            fits: Default::default(),
            pending: None,
            next_index: 0,
            dropped: 0,
        }
    }

    /// Buffer capacities `(slow, fast)`; the segmenter never holds more.
    pub fn capacity(&self) -> (usize, usize) {
        (self.slow_cap, self.fast_cap)
    }

    pub fn buffered(&self) -> (usize, usize) {
        (self.window.len(), self.fast.len())
    }

    /// Contacts discarded because they no longer fit in the window.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn push_fast(&mut self, frame: FastFrame) {
        if self.fast.len() == self.fast_cap {
            self.fast.pop_front();
        }
        self.fast.push_back(frame);
    }

    /// Consume one slow frame; returns the footsteps that became final.
    pub fn push_slow(&mut self, frame: SlowFrame) -> Vec<FootstepSegment> {
        let index = self.next_index;
        self.next_index += 1;
        for (fit, &v) in self.fits.iter_mut().zip(&frame.tactile) {
            fit.push(index, v);
        }
        if self.window.len() == self.slow_cap {
            self.window.pop_front();
        }
        let sum = frame.tactile.iter().sum();
        self.window.push_back(Entry { index, frame, sum });

        let mut out = Vec::new();
        let (lo, hi) = self
            .window
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.sum), hi.max(e.sum)));
        let threshold = self.params.threshold(lo, hi);

        if let Some(thr) = threshold {
            let n = self.window.len();
            if n >= 2 && self.window[n - 2].sum >= thr && sum < thr {
                if let Some(c) = self.contact_ending_at(n - 1, thr) {
                    if self.merger.long_enough(&c) {
                        match self.pending {
                            Some(p) if self.merger.should_merge(&p, &c) => {
                                let (xp, xc) = (self.sum_at(p.peak), self.sum_at(c.peak));
                                let peak = if xc > xp { c.peak } else { p.peak };
                                self.pending = Some(Contact {
                                    start: p.start,
                                    end: c.end,
                                    peak,
                                    last_peak: c.peak,
                                });
                            }
                            Some(p) => {
                                out.extend(self.emit(p));
                                self.pending = Some(c);
                            }
                            None => self.pending = Some(c),
                        }
                    }
                }
            }
        }

        let in_contact = threshold.is_some_and(|thr| sum >= thr);
        if let Some(p) = self.pending {
            if !in_contact && self.merger.settled(&p, index) {
                self.pending = None;
                out.extend(self.emit(p));
            }
        }
        out
    }

    /// Flush a footstep still waiting for its merge window at end of stream.
    pub fn finish(&mut self) -> Option<FootstepSegment> {
        let p = self.pending.take()?;
        self.emit(p)
    }

    fn sum_at(&self, index: usize) -> f64 {
        let front = self.window.front().map_or(0, |e| e.index);
        self.window
            .get(index.wrapping_sub(front))
            .map_or(f64::NEG_INFINITY, |e| e.sum)
    }

    /// The above-threshold stretch ending just before window position `end`.
    fn contact_ending_at(&self, end: usize, thr: f64) -> Option<Contact> {
        let mut start = end;
        while start > 0 && self.window[start - 1].sum >= thr {
            start -= 1;
        }
        if start == 0 {
            // the stretch reaches back past the window; its start is unknown
            return None;
        }
        let mut peak = start;
        for i in start..end {
            if self.window[i].sum > self.window[peak].sum {
                peak = i;
            }
        }
        let base = self.window[0].index;
        Some(Contact {
            start: base + start,
            end: base + end,
            peak: base + peak,
            last_peak: base + peak,
        })
    }

    fn emit(&mut self, c: Contact) -> Option<FootstepSegment> {
        let front = self.window.front()?.index;
        if c.start < front || c.end - front >= self.window.len() {
            self.dropped += 1;
            return None;
        }
        let lines: [(f64, f64); TACTILE_CHANNELS] = core::array::from_fn(|k| self.fits[k].line());
        let slow: Vec<SlowFrame> = (c.start..c.end)
            .map(|i| {
                let e = &self.window[i - front];
                let mut frame = e.frame;
                for (k, v) in frame.tactile.iter_mut().enumerate() {
                    let (a, b) = lines[k];
                    *v -= a + b * e.index as f64;
                }
                frame
            })
            .collect();
        let t_start = self.window[c.start - front].frame.t;
        let t_end = self.window[c.end - front].frame.t;
        let t_peak = self.window[c.peak - front].frame.t;
        let fast: Vec<FastFrame> = self
            .fast
            .iter()
            .filter(|f| f.t >= t_start && f.t < t_end)
            .copied()
            .collect();
        Some(FootstepSegment {
            t_start,
            t_end,
            t_peak,
            slow_start: c.start,
            slow,
            fast,
            fast_rate_hz: self.fast_rate_hz,
            slow_rate_hz: self.slow_rate_hz,
        })
    }
}
