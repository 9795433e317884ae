#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cogsim/channel.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/random.hpp"

namespace cogsim {

// The four admissible-family algorithms. Values match their customary numbers.
enum class Algorithm : int {
    no_cooperation = 1,
    simple_forwarding = 3,
    network_coding = 4,
    randomized_relay = 5,
};

inline Algorithm algorithm_from_int(int n)
{
    switch (n) {
    case 1: return Algorithm::no_cooperation;
    case 3: return Algorithm::simple_forwarding;
    case 4: return Algorithm::network_coding;
    case 5: return Algorithm::randomized_relay;
    default: throw ConfigError("unknown algorithm " + std::to_string(n) + " (expected 1, 3, 4 or 5)");
    }
}

inline int to_int(Algorithm alg) { return static_cast<int>(alg); }

inline bool uses_coding(Algorithm alg)
{
    return alg == Algorithm::network_coding || alg == Algorithm::randomized_relay;
}

using PacketId = std::uint64_t;
using Slot = std::int64_t;

enum class Session : std::uint8_t { primary = 1, secondary = 2 };

// Session (1,3) packet with its timestamps. Session (2,4) packets are plain ids.
struct Packet {
    PacketId id = 0;
    Slot arrival_slot = 0;
    std::optional<Slot> head_slot;
    std::optional<Slot> delivery_slot;
};

struct PlainPayload {
    Session session;
    PacketId id;
};

// XOR of one primary packet node 4 holds and one secondary packet node 3
// holds; carried symbolically as the pair of constituent ids.
struct CodedPayload {
    PacketId primary;
    PacketId secondary;
};

using Payload = std::variant<std::monostate, PlainPayload, CodedPayload>;

struct SlotDecision {
    Transmitter transmitter = Transmitter::idle;
    Payload payload;

    bool coded() const { return std::holds_alternative<CodedPayload>(payload); }
};

struct Delivery {
    Slot slot;
    Session session;
    PacketId id;
    int receiver;
    Slot service = 0;  // primary only: slots from first node-1 attempt to reception, inclusive

    friend bool operator==(const Delivery&, const Delivery&) = default;
};

// Queues and buffers of all four nodes.
struct SystemState {
    Algorithm alg = Algorithm::no_cooperation;
    Slot slot = 0;

    std::deque<Packet> q1;                   // node 1 primary queue
    PacketId next_secondary = 0;             // head of the saturated node-2 queue
    PacketId next_primary = 0;

    std::optional<Packet> relay;             // simple forwarding relay buffer at node 2
    std::optional<Packet> relay_unheard;     // at node 2; erased at 3 and at 4
    std::optional<Packet> relay_overheard;   // at node 2; erased at 3, held by 4
    std::deque<PacketId> coding_queue;       // node-2 secondaries received by 3, erased at 4
    std::deque<PacketId> node3_side_info;    // node 3's copy of coding_queue
    std::optional<PacketId> node4_copy;      // primary overheard by 4, erased at 3

    std::optional<PacketId> last_primary_delivered;

    explicit SystemState(Algorithm a = Algorithm::no_cooperation) : alg(a) {}

    void enqueue_arrivals(unsigned count)
    {
        for (unsigned i = 0; i < count; ++i) q1.push_back(Packet{next_primary++, slot, {}, {}});
    }

    // Primary packets held at node 2 and no longer in q1 (0 or 1).
    int primary_at_relay() const
    {
        int n = (relay ? 1 : 0) + (relay_overheard ? 1 : 0);
        // The randomized relay keeps an unheard packet at the head of q1 too.
        if (relay_unheard && alg != Algorithm::randomized_relay) ++n;
        return n;
    }

    std::size_t primary_in_system() const { return q1.size() + static_cast<std::size_t>(primary_at_relay()); }
};

namespace detail {

inline void stamp_head(Packet& p, Slot slot)
{
    if (!p.head_slot) p.head_slot = slot;
}

inline void deliver_primary(SystemState& s, Packet p, std::vector<Delivery>& out)
{
    p.delivery_slot = s.slot;
    out.push_back({s.slot, Session::primary, p.id, 3, s.slot - p.head_slot.value_or(s.slot) + 1});
    s.last_primary_delivered = p.id;
}

inline void deliver_secondary(SystemState& s, PacketId id, std::vector<Delivery>& out)
{
    out.push_back({s.slot, Session::secondary, id, 4, 0});
}

inline SlotDecision send_primary(Transmitter tx, const Packet& p)
{
    return {tx, PlainPayload{Session::primary, p.id}};
}

inline SlotDecision send_secondary_head(const SystemState& s)
{
    return {Transmitter::node2, PlainPayload{Session::secondary, s.next_secondary}};
}

} // namespace detail

// Who transmits what in the current slot. `coin` is consulted only by the
// randomized relay, once per slot while node 2 holds an unheard packet.
inline SlotDecision schedule(const SystemState& s, double q, RandomStream& coin)
{
    using detail::send_primary;
    switch (s.alg) {
    case Algorithm::no_cooperation:
        if (!s.q1.empty()) return send_primary(Transmitter::node1, s.q1.front());
        return detail::send_secondary_head(s);

    case Algorithm::simple_forwarding:
        if (s.relay) return send_primary(Transmitter::node2, *s.relay);
        if (!s.q1.empty()) return send_primary(Transmitter::node1, s.q1.front());
        return detail::send_secondary_head(s);

    case Algorithm::network_coding:
    case Algorithm::randomized_relay:
        if (s.relay_unheard && s.relay_overheard)
            throw InvariantViolation("both node-2 relay buffers are occupied at slot " + std::to_string(s.slot));
        if (s.relay_unheard) {
            if (s.alg == Algorithm::randomized_relay && coin.bernoulli(q))
                return send_primary(Transmitter::node1, s.q1.front());
            return send_primary(Transmitter::node2, *s.relay_unheard);
        }
        if (s.relay_overheard) {
            if (s.coding_queue.empty()) return send_primary(Transmitter::node2, *s.relay_overheard);
            return {Transmitter::node2, CodedPayload{s.relay_overheard->id, s.coding_queue.front()}};
        }
        if (!s.q1.empty()) return send_primary(Transmitter::node1, s.q1.front());
        return detail::send_secondary_head(s);
    }
    return {};
}

namespace detail {

inline void apply_no_cooperation(SystemState& s, const ReceptionEvent& ev, std::vector<Delivery>& out)
{
    if (ev.transmitter == Transmitter::node1) {
        if (ev.received(3)) {
            deliver_primary(s, s.q1.front(), out);
            s.q1.pop_front();
        }
    } else if (ev.received(4)) {
        deliver_secondary(s, s.next_secondary++, out);
    }
}

inline void apply_simple_forwarding(SystemState& s, const ReceptionEvent& ev, std::vector<Delivery>& out)
{
    if (s.relay) {
        if (ev.received(3)) {
            deliver_primary(s, *s.relay, out);
            s.relay.reset();
        }
    } else if (ev.transmitter == Transmitter::node1) {
        if (ev.received(3)) {
            deliver_primary(s, s.q1.front(), out);
            s.q1.pop_front();
        } else if (ev.received(2)) {
            s.relay = s.q1.front();
            s.q1.pop_front();
        }
    } else if (ev.received(4)) {
        deliver_secondary(s, s.next_secondary++, out);
    }
}

inline void move_to_overheard(SystemState& s, const Packet& p)
{
    s.relay_overheard = p;
    s.node4_copy = p.id;
}

inline void apply_coding(SystemState& s, const SlotDecision& d, const ReceptionEvent& ev,
                         std::vector<Delivery>& out)
{
    const bool randomized = s.alg == Algorithm::randomized_relay;

    if (s.relay_unheard) {
        // Sent by node 2 (or, randomized relay, by node 1); same packet either way.
        const Packet p = *s.relay_unheard;
        if (ev.received(3)) {
            s.relay_unheard.reset();
            if (randomized) s.q1.pop_front();
            deliver_primary(s, p, out);
        } else if (ev.received(4)) {
            s.relay_unheard.reset();
            if (randomized) s.q1.pop_front();
            move_to_overheard(s, p);
        }
        return;
    }

    if (s.relay_overheard) {
        if (d.coded() && ev.received(4)) {
            deliver_secondary(s, s.coding_queue.front(), out);
            s.coding_queue.pop_front();
            s.node3_side_info.pop_front();
        }
        if (ev.received(3)) {
            const Packet p = *s.relay_overheard;
            s.relay_overheard.reset();
            s.node4_copy.reset();
            deliver_primary(s, p, out);
        }
        return;
    }

    if (ev.transmitter == Transmitter::node1) {
        Packet& head = s.q1.front();
        if (ev.received(3)) {
            const Packet p = head;
            s.q1.pop_front();
            s.node4_copy.reset();
            deliver_primary(s, p, out);
            return;
        }
        const bool at2 = ev.received(2);
        const bool at4 = ev.received(4);
        if (at2 && at4) {
            move_to_overheard(s, head);
            s.q1.pop_front();
        } else if (at4) {
            if (!s.node4_copy) s.node4_copy = head.id;
        } else if (at2) {
            if (!s.node4_copy) {
                s.relay_unheard = head;
                if (!randomized) s.q1.pop_front();
            } else {
                s.relay_overheard = head;
                s.q1.pop_front();
            }
        }
        return;
    }

    // Node 2 serving its own queue: the primary system is empty.
    if (ev.received(4)) {
        deliver_secondary(s, s.next_secondary++, out);
    } else if (ev.received(3)) {
        s.coding_queue.push_back(s.next_secondary);
        s.node3_side_info.push_back(s.next_secondary);
        ++s.next_secondary;
    }
}

} // namespace detail

// Applies the feedback of one slot and advances the slot counter. Deliveries
// made in the slot are appended to `out`.
inline void apply_outcome(SystemState& s, const SlotDecision& d, const ReceptionEvent& ev,
                          std::vector<Delivery>& out)
{
    if (ev.transmitter != d.transmitter)
        throw InvariantViolation("reception event from node " + std::to_string(node_id(ev.transmitter)) +
                                 " but node " + std::to_string(node_id(d.transmitter)) + " was scheduled");
    if (d.transmitter == Transmitter::node1) {
        if (s.q1.empty()) throw InvariantViolation("node 1 scheduled with an empty queue");
        detail::stamp_head(s.q1.front(), s.slot);
    }
    switch (s.alg) {
    case Algorithm::no_cooperation: detail::apply_no_cooperation(s, ev, out); break;
    case Algorithm::simple_forwarding: detail::apply_simple_forwarding(s, ev, out); break;
    case Algorithm::network_coding:
    case Algorithm::randomized_relay: detail::apply_coding(s, d, ev, out); break;
    }
    ++s.slot;
}

// First structural invariant the state breaks, if any. Checked at slot boundaries.
inline std::optional<std::string> check_state_invariants(const SystemState& s)
{
    if (s.relay_unheard && s.relay_overheard) return "both node-2 relay buffers occupied";
    if (s.relay_overheard && (!s.node4_copy || *s.node4_copy != s.relay_overheard->id))
        return "node 4 does not hold the packet in the overheard relay buffer";
    if (s.coding_queue.size() != s.node3_side_info.size() ||
        (!s.coding_queue.empty() && (s.coding_queue.front() != s.node3_side_info.front() ||
                                     s.coding_queue.back() != s.node3_side_info.back())))
        return "node 3 side information differs from the node-2 coding queue";
    if (s.relay_unheard) {
        if (s.node4_copy) return "node 4 holds a copy while the unheard relay buffer is occupied";
        if (s.alg == Algorithm::randomized_relay && (s.q1.empty() || s.q1.front().id != s.relay_unheard->id))
            return "randomized relay: unheard packet is not the head of q1";
    }
    if (s.primary_at_relay() > 1) return "more than one primary packet at node 2";
    if (!uses_coding(s.alg) && (s.relay_unheard || s.relay_overheard || !s.coding_queue.empty()))
        return "coding structures used by a non-coding algorithm";
    if (s.alg != Algorithm::simple_forwarding && s.relay) return "relay buffer used outside simple forwarding";
    return std::nullopt;
}

} // namespace cogsim
