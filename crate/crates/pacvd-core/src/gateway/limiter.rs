//! Request pacing: a token bucket for requests-per-minute plus a bound on
//! concurrent in-flight dispatches. Both are internally synchronized; the
//! gateway itself stays freely shareable.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

pub struct RateLimiter {
    bucket: Option<Mutex<Bucket>>,
    in_flight: Mutex<usize>,
    max_in_flight: usize,
    cv: Condvar,
}

struct Bucket {
    tokens: f64,
    last: Instant,
    per_minute: f64,
}

pub struct InFlightGuard<'a> {
    limiter: &'a RateLimiter,
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.limiter.in_flight.lock().unwrap();
        *n -= 1;
        self.limiter.cv.notify_one();
    }
}

impl RateLimiter {
    pub fn new(rpm: Option<u32>, max_in_flight: usize) -> Self {
        RateLimiter {
            bucket: rpm.map(|r| {
                Mutex::new(Bucket {
                    tokens: 1.0,
                    last: Instant::now(),
                    per_minute: r as f64,
                })
            }),
            in_flight: Mutex::new(0),
            max_in_flight: max_in_flight.max(1),
            cv: Condvar::new(),
        }
    }

    /// Block until a request slot and a rate token are available.
    pub fn acquire(&self) -> InFlightGuard<'_> {
        let mut n = self.in_flight.lock().unwrap();
        while *n >= self.max_in_flight {
            n = self.cv.wait(n).unwrap();
        }
        *n += 1;
        drop(n);

        if let Some(bucket) = &self.bucket {
            loop {
                let wait = {
                    let mut b = bucket.lock().unwrap();
                    let now = Instant::now();
                    let refill = now.duration_since(b.last).as_secs_f64() * b.per_minute / 60.0;
                    b.tokens = (b.tokens + refill).min(b.per_minute.max(1.0));
                    b.last = now;
                    if b.tokens >= 1.0 {
                        b.tokens -= 1.0;
                        None
                    } else {
                        Some(Duration::from_secs_f64(
                            (1.0 - b.tokens) * 60.0 / b.per_minute,
                        ))
                    }
                };
                match wait {
                    None => break,
                    Some(d) => std::thread::sleep(d.min(Duration::from_millis(200))),
                }
            }
        }
        InFlightGuard { limiter: self }
    }
}
