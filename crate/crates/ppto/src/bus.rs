use std::collections::VecDeque;

use sapsr_device::TokenId;

/// A trajectory hop addressed to whichever device generated `token`.
/// The message carries no sender identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryRequest {
    pub iteration: u32,
    pub token: TokenId,
}

/// FIFO broadcast queue.
#[derive(Debug, Default)]
pub struct MessageBus {
    queue: VecDeque<TrajectoryRequest>,
    sent: u64,
}

impl MessageBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, req: TrajectoryRequest) {
        self.sent += 1;
        self.queue.push_back(req);
    }

    pub fn next(&mut self) -> Option<TrajectoryRequest> {
        self.queue.pop_front()
    }

    pub fn is_quiet(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn clear(&mut self) {
        self.queue.clear();
    }
}
