//! Message bus between the planner and the agents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::UavId;
use crate::protocol::Message;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
struct Envelope<S> {
    sent_at: u64,
    msg: Message<S>,
}

/// Messages handed out by one delivery round.
#[derive(Clone, Debug, Default)]
pub struct Delivery<S> {
    pub to_planner: Vec<Message<S>>,
    pub to_agents: Vec<Message<S>>,
    pub dropped: Vec<Message<S>>,
}

/// Messages sent in one step arrive at the start of the next one, in send
/// order. A message whose vehicle has its link down at delivery is dropped.
#[derive(Clone, Debug)]
pub struct Bus<S> {
    in_flight: Vec<Envelope<S>>,
    loss: f64,
    rng: ChaCha8Rng,
}

impl<S: Scalar> Bus<S> {
    pub fn new(seed: u64, loss_probability: S) -> Self {
        Self {
            in_flight: Vec::new(),
            loss: loss_probability.as_f64(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn send(&mut self, step: u64, msg: Message<S>) {
        self.in_flight.push(Envelope { sent_at: step, msg });
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    /// Hand out everything sent before `step`.
    pub fn deliver(&mut self, step: u64, link_up: impl Fn(&UavId) -> bool) -> Delivery<S> {
        let (due, keep): (Vec<_>, Vec<_>) = std::mem::take(&mut self.in_flight).into_iter().partition(|e| e.sent_at < step);
        self.in_flight = keep;
        let mut out = Delivery { to_planner: Vec::new(), to_agents: Vec::new(), dropped: Vec::new() };
        for e in due {
            // Draw only when loss is configured so lossless runs use no randomness.
            let lost = self.loss > 0.0 && self.rng.random::<f64>() < self.loss;
            if lost || !link_up(e.msg.uav()) {
                out.dropped.push(e.msg);
            } else if e.msg.is_downlink() {
                out.to_agents.push(e.msg);
            } else {
                out.to_planner.push(e.msg);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ack(uav: &str, seq: u64) -> Message<f64> {
        Message::Ack { uav: uav.into(), seq }
    }

    #[test]
    fn nothing_arrives_in_the_step_it_was_sent() {
        let mut bus = Bus::new(1, 0.0);
        bus.send(3, ack("a", 1));
        assert!(bus.deliver(3, |_| true).to_agents.is_empty());
        let d = bus.deliver(4, |_| true);
        assert_eq!(d.to_agents, vec![ack("a", 1)]);
        assert_eq!(bus.in_flight(), 0);
    }

    #[test]
    fn down_link_drops_and_keeps_order_otherwise() {
        let mut bus = Bus::new(1, 0.0);
        bus.send(0, ack("a", 1));
        bus.send(0, ack("b", 1));
        bus.send(0, ack("a", 2));
        let d = bus.deliver(1, |u| u.as_str() == "a");
        assert_eq!(d.to_agents, vec![ack("a", 1), ack("a", 2)]);
        assert_eq!(d.dropped, vec![ack("b", 1)]);
    }

    #[test]
    fn loss_is_seeded() {
        let run = |seed| {
            let mut bus = Bus::new(seed, 0.5);
            (0..100).for_each(|i| bus.send(0, ack("a", i)));
            bus.deliver(1, |_| true).to_agents
        };
        assert_eq!(run(7), run(7));
        let n = run(7).len();
        assert!(n > 20 && n < 80, "{n}");
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #[test]
            fn causal_and_ordered(
                sends in proptest::collection::vec((0u64..20, 0u8..3), 0..60),
                down in proptest::collection::vec(proptest::bool::ANY, 3),
                loss in prop_oneof![Just(0.0), 0.0..0.5f64],
                seed in any::<u64>(),
            ) {
                let mut sends = sends;
                sends.sort_by_key(|s| s.0);
                let names = ["a", "b", "c"];
                let mut bus = Bus::new(seed, loss);
                let mut seq = 0;
                let mut sent_at: Vec<u64> = vec![0];
                let mut delivered: Vec<(u64, u64)> = Vec::new();
                let mut next = sends.into_iter().peekable();
                for step in 0..22u64 {
                    let is_up = |u: &UavId| !down[names.iter().position(|n| *n == u.as_str()).expect("known")];
                    let d = bus.deliver(step, is_up);
                    for m in d.to_agents {
                        let Message::Ack { uav, seq } = m else { unreachable!() };
                        prop_assert!(is_up(&uav), "delivered over a down link");
                        delivered.push((step, seq));
                    }
                    while let Some((_, who)) = next.next_if(|s| s.0 == step) {
                        seq += 1;
                        sent_at.push(step);
                        bus.send(step, ack(names[who as usize], seq));
                    }
                }
                // Sequence numbers grow with send step, so arrival order is send order.
                for w in delivered.windows(2) {
                    prop_assert!(w[0].1 < w[1].1);
                }
                for (at, s) in &delivered {
                    prop_assert!(*at > sent_at[*s as usize], "message {} sent at {} arrived at {}", s, sent_at[*s as usize], at);
                }
            }
        }
    }
}
