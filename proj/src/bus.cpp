#include "cswarm/bus.hpp"

#include <algorithm>
#include <stdexcept>

namespace cswarm {

namespace {
// absorbs rounding in sent_time + latency against tick times
constexpr double kTimeSlack = 1e-9;
} // namespace

double visible_time(const Message& m, int receiver, double latency) {
  return m.sender == receiver ? m.sent_time : m.sent_time + latency;
}

std::vector<Message> bus_deliver(std::span<const Message> messages, double latency, double now,
                                 int receiver) {
  if (latency < 0.0)
    throw std::invalid_argument("bus latency must be >= 0");
  std::vector<Message> out;
  for (const auto& m : messages)
    if (visible_time(m, receiver, latency) <= now + kTimeSlack)
      out.push_back(m);
  return out;
}

MessageBus::MessageBus(int n_agents, double latency) : latency_(latency), inbox_(n_agents) {
  if (latency < 0.0)
    throw std::invalid_argument("bus latency must be >= 0");
}

void MessageBus::publish(const Message& m) {
  for (int r = 0; r < static_cast<int>(inbox_.size()); ++r) {
    auto& box = inbox_[r];
    const double vis = visible_time(m, r, latency_);
    auto pos = std::upper_bound(box.begin(), box.end(), vis,
                                [](double v, const Pending& p) { return v < p.visible; });
    box.insert(pos, Pending{vis, m});
  }
}

std::vector<Message> MessageBus::collect(int receiver, double now) {
  auto& box = inbox_.at(receiver);
  auto end = std::find_if(box.begin(), box.end(),
                          [&](const Pending& p) { return p.visible > now + kTimeSlack; });
  std::vector<Message> out;
  out.reserve(static_cast<size_t>(end - box.begin()));
  for (auto it = box.begin(); it != end; ++it)
    out.push_back(std::move(it->message));
  box.erase(box.begin(), end);
  return out;
}

} // namespace cswarm
