#pragma once

// Broadcast channel between agents with a fixed delivery latency.

#include "cswarm/detector.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace cswarm {

/// Sender position in the sender's own frame.
struct PositionReport {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
};

struct Message {
  double sent_time = 0.0;
  int sender = 0;
  int frame_id = 0;
  std::variant<MeasurementEvent, PositionReport> body;
};

/// Time at which `m` becomes visible to `receiver`.
double visible_time(const Message& m, int receiver, double latency);

/// Messages from `messages` visible to `receiver` at `now`, in input order.
std::vector<Message> bus_deliver(std::span<const Message> messages, double latency, double now,
                                 int receiver);

/// Stateful broadcast queue. Every message is delivered exactly once to every
/// agent, ordered by visibility time and FIFO per sender.
class MessageBus {
public:
  MessageBus(int n_agents, double latency);

  void publish(const Message& m);
  /// Pops everything visible to `receiver` at `now`.
  std::vector<Message> collect(int receiver, double now);

  double latency() const { return latency_; }

private:
  struct Pending {
    double visible;
    Message message;
  };
  double latency_;
  std::vector<std::vector<Pending>> inbox_;
};

} // namespace cswarm
