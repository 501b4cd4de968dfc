#include "tracelens/synthgen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tracelens/errors.hpp"
#include "tracelens/rng.hpp"

namespace tracelens {

std::size_t WorkloadTemplate::canonical_size() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
}

std::size_t WorkloadTemplate::unique_pairs() const {
    std::set<EventPair> seen;
    for (const auto& b : blocks) {
        seen.insert(b.client);
        seen.insert(b.internal_events.begin(), b.internal_events.end());
    }
    for (const auto& bg : background) seen.insert(bg.pair);
    return seen.size();
}

void validate(const WorkloadTemplate& tmpl) {
    if (tmpl.blocks.empty() && tmpl.background.empty()) {
        throw ConfigError("workload template '" + tmpl.name + "' has no blocks and no background");
    }
    for (std::size_t b = 0; b < tmpl.blocks.size(); ++b) {
        const auto& block = tmpl.blocks[b];
        if (block.client.first.empty() || block.client.second.empty()) {
            throw ConfigError("template block " + std::to_string(b) + ": empty client pair");
        }
        for (const int i : block.commutable) {
            if (i < 0 || static_cast<std::size_t>(i) + 1 >= block.size()) {
                throw ConfigError("template block " + std::to_string(b) + ": commutable index " +
                                  std::to_string(i) + " does not name an adjacent event pair");
            }
        }
    }
    for (const auto& bg : tmpl.background) {
        if (bg.events_per_trace < 0) throw ConfigError("background rate must be >= 0");
    }
}

nlohmann::json WorkloadTemplate::to_json() const {
    nlohmann::json blocks_json = nlohmann::json::array();
    for (const auto& b : blocks) {
        nlohmann::json internals = nlohmann::json::array();
        for (const auto& p : b.internal_events) internals.push_back({p.first, p.second});
        blocks_json.push_back({
            {"client", {b.client.first, b.client.second}},
            {"internal", std::move(internals)},
            {"commutable", b.commutable},
        });
    }
    nlohmann::json bg_json = nlohmann::json::array();
    for (const auto& bg : background) {
        bg_json.push_back({{"pair", {bg.pair.first, bg.pair.second}},
                           {"events_per_trace", bg.events_per_trace}});
    }
    return nlohmann::json{{"name", name}, {"blocks", std::move(blocks_json)}, {"background", std::move(bg_json)}};
}

namespace {

EventPair pair_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
        throw ParseError(std::string("workload template: ") + what +
                         " must be a [sender, service] string pair");
    }
    return {j[0].get<std::string>(), j[1].get<std::string>()};
}

} // namespace

WorkloadTemplate WorkloadTemplate::from_json(const nlohmann::json& j) {
    WorkloadTemplate tmpl;
    tmpl.name = j.value("name", "custom");
    for (const auto& bj : j.value("blocks", nlohmann::json::array())) {
        RequestBlock block;
        block.client = pair_from_json(bj.at("client"), "client");
        for (const auto& p : bj.value("internal", nlohmann::json::array())) {
            block.internal_events.push_back(pair_from_json(p, "internal event"));
        }
        block.commutable = bj.value("commutable", std::vector<int>{});
        tmpl.blocks.push_back(std::move(block));
    }
    for (const auto& bg : j.value("background", nlohmann::json::array())) {
        tmpl.background.push_back(
            {pair_from_json(bg.at("pair"), "background pair"), bg.at("events_per_trace").get<double>()});
    }
    validate(tmpl);
    return tmpl;
}

// ---------------------------------------------------------------------------
// Presets. Scaled so that generated corpora land on realistic workload
// shapes: depl 53 distinct pairs / ~243 events, net 37 / ~212, sto 34 / ~85.

namespace {

struct PresetShape {
    std::vector<EventPair> clients;
    std::vector<EventPair> hubs;       // one polling/status call per block
    std::vector<EventPair> satellites; // work steps, windowed across blocks
    std::vector<int> block_sizes;      // internal events per block
    int satellite_stride = 5;
    std::vector<BackgroundSource> background;
};

// Each request block interleaves its hub call between distinct work steps:
// client, hub, s1, hub, s2, ..., like a service polling for status after
// every operation. Hubs are block-unique and satellites never repeat within
// a block, so every adjacent event pair in a canonical trace is globally
// unique and has a deterministic successor; sequence models recover quickly
// after a benign reordering.
WorkloadTemplate materialize(std::string name, const PresetShape& shape) {
    WorkloadTemplate tmpl;
    tmpl.name = std::move(name);
    const int pool_size = static_cast<int>(shape.satellites.size());
    for (std::size_t b = 0; b < shape.clients.size(); ++b) {
        RequestBlock block;
        block.client = shape.clients[b];
        const EventPair& hub = shape.hubs[b];
        const int internals = shape.block_sizes[b];
        const int offset = static_cast<int>(b) * shape.satellite_stride % pool_size;
        for (int i = 0; i < internals; ++i) {
            if (i % 2 == 0) {
                block.internal_events.push_back(hub);
            } else {
                block.internal_events.push_back(shape.satellites[(offset + i / 2) % pool_size]);
            }
        }
        // A benign reorder point on alternating requests, away from the
        // client call; some request types race internally, others do not.
        const int len = static_cast<int>(block.size());
        if (b % 2 == 0) block.commutable = {len / 2};
        tmpl.blocks.push_back(std::move(block));
    }
    tmpl.background = shape.background;
    validate(tmpl);
    return tmpl;
}

WorkloadTemplate depl_preset() {
    PresetShape shape;
    shape.clients = {
        {"client", "compute.create_server"},
        {"client", "compute.create_keypair"},
        {"client", "compute.create_security_group"},
        {"client", "volume.attach_volume"},
        {"client", "network.create_network"},
        {"client", "network.create_subnet"},
        {"client", "network.create_router"},
        {"client", "network.associate_floating_ip"},
        {"client", "compute.reboot_server"},
        {"client", "compute.delete_server"},
    };
    shape.hubs = {
        {"nova-api", "instance.get_status"},
        {"nova-api", "keypair.get_status"},
        {"nova-api", "security_group.get_status"},
        {"cinder-api", "volume.get_status"},
        {"neutron-server", "network.get_status"},
        {"neutron-server", "subnet.get_status"},
        {"neutron-server", "router.get_status"},
        {"neutron-server", "floating_ip.get_status"},
        {"nova-api", "instance.get_power_state"},
        {"nova-api", "instance.get_task_state"},
    };
    shape.satellites = {
        {"nova-api", "db.instance_create"},
        {"nova-api", "quota.reserve"},
        {"nova-scheduler", "scheduler.select_destinations"},
        {"nova-conductor", "compute_task.build_instances"},
        {"nova-compute", "compute.spawn_instance"},
        {"nova-compute", "image.download"},
        {"nova-compute", "instance.power_on"},
        {"nova-compute", "db.instance_update"},
        {"nova-conductor", "db.instance_fault_create"},
        {"neutron-server", "port.create"},
        {"neutron-server", "port.update_status"},
        {"neutron-dhcp-agent", "dhcp.subnet_update"},
        {"neutron-l3-agent", "router.add_interface"},
        {"neutron-server", "subnet.allocate"},
        {"neutron-server", "security_group.sync_rules"},
        {"neutron-l3-agent", "floating_ip.associate"},
        {"neutron-server", "network.allocate_segment"},
        {"neutron-dhcp-agent", "dhcp.port_reserve"},
        {"cinder-api", "volume.reserve"},
        {"cinder-scheduler", "scheduler.filter_hosts"},
        {"cinder-volume", "volume.initialize_connection"},
        {"cinder-volume", "volume.attach"},
        {"keystone", "token.validate"},
        {"nova-compute", "volume.connect"},
        {"nova-compute", "network.plug_vif"},
    };
    shape.satellite_stride = 5;
    shape.background = {
        {{"nova-compute", "heartbeat.report_state"}, 4.0},
        {{"neutron-dhcp-agent", "heartbeat.report_state"}, 3.0},
        {{"cinder-volume", "heartbeat.report_state"}, 3.0},
        {{"nova-compute", "resource.update_usage"}, 2.5},
        {{"neutron-l3-agent", "router.sync_state"}, 2.5},
        {{"nova-scheduler", "cache.refresh_hosts"}, 2.0},
        {{"cinder-scheduler", "cache.refresh_pools"}, 2.0},
        {{"keystone", "token.cleanup_expired"}, 1.0},
    };
    // 3 blocks of 22 internal events + 7 of 21 -> 213 internals + 10 client
    // calls, ~20 background events on top.
    shape.block_sizes = {22, 22, 22, 21, 21, 21, 21, 21, 21, 21};
    return materialize("depl", shape);
}

WorkloadTemplate net_preset() {
    PresetShape shape;
    shape.clients = {
        {"client", "network.create_network"},
        {"client", "compute.create_server"},
        {"client", "network.ping_gateway"},
        {"client", "network.create_isolated_network"},
        {"client", "compute.attach_interface"},
        {"client", "network.ping_interface"},
        {"client", "network.remove_router"},
        {"client", "network.add_router"},
    };
    shape.hubs = {
        {"neutron-server", "network.get_status"},
        {"nova-api", "instance.get_status"},
        {"neutron-server", "gateway.get_status"},
        {"neutron-server", "segment.get_status"},
        {"nova-api", "interface.get_status"},
        {"neutron-server", "port.get_status"},
        {"neutron-server", "router.get_status"},
        {"neutron-server", "agent.get_status"},
    };
    shape.satellites = {
        {"neutron-server", "network.allocate_segment"},
        {"neutron-server", "subnet.allocate"},
        {"neutron-server", "port.create"},
        {"neutron-server", "port.update_status"},
        {"neutron-dhcp-agent", "dhcp.subnet_update"},
        {"neutron-dhcp-agent", "dhcp.port_reserve"},
        {"neutron-l3-agent", "router.add_interface"},
        {"neutron-l3-agent", "router.remove_interface"},
        {"neutron-server", "security_group.sync_rules"},
        {"neutron-server", "db.port_update"},
        {"nova-scheduler", "scheduler.select_destinations"},
        {"nova-compute", "compute.spawn_instance"},
        {"nova-compute", "network.plug_vif"},
        {"keystone", "token.validate"},
        {"neutron-server", "agent.reschedule_router"},
    };
    shape.satellite_stride = 3;
    shape.background = {
        {{"neutron-dhcp-agent", "heartbeat.report_state"}, 3.0},
        {{"neutron-l3-agent", "heartbeat.report_state"}, 2.5},
        {{"nova-compute", "heartbeat.report_state"}, 2.0},
        {{"neutron-server", "agent.status_poll"}, 2.0},
        {{"nova-compute", "resource.update_usage"}, 1.5},
        {{"keystone", "token.cleanup_expired"}, 1.0},
    };
    shape.block_sizes = {24, 24, 24, 24, 24, 24, 24, 24};
    return materialize("net", shape);
}

WorkloadTemplate sto_preset() {
    PresetShape shape;
    shape.clients = {
        {"client", "volume.create_from_image"},
        {"client", "compute.boot_server"},
        {"client", "compute.rebuild_server"},
        {"client", "volume.delete_volume"},
        {"client", "compute.delete_server"},
        {"client", "image.delete_image"},
    };
    shape.hubs = {
        {"cinder-api", "volume.get_status"},
        {"nova-api", "instance.get_status"},
        {"nova-api", "instance.get_task_state"},
        {"cinder-api", "volume.get_attachment"},
        {"nova-api", "instance.get_power_state"},
        {"glance-api", "image.get_status"},
    };
    shape.satellites = {
        {"cinder-api", "volume.reserve"},
        {"cinder-scheduler", "scheduler.filter_hosts"},
        {"cinder-volume", "volume.create"},
        {"cinder-volume", "volume.copy_image"},
        {"cinder-volume", "db.volume_update"},
        {"glance-api", "image.get_metadata"},
        {"glance-api", "image.download"},
        {"nova-scheduler", "scheduler.select_destinations"},
        {"nova-compute", "compute.spawn_instance"},
        {"nova-compute", "compute.rebuild_instance"},
        {"nova-compute", "volume.connect"},
        {"nova-compute", "instance.power_on"},
        {"cinder-volume", "volume.delete"},
        {"cinder-volume", "volume.detach"},
        {"glance-api", "image.delete"},
        {"keystone", "token.validate"},
    };
    shape.satellite_stride = 3;
    shape.background = {
        {{"cinder-volume", "heartbeat.report_state"}, 1.5},
        {{"nova-compute", "heartbeat.report_state"}, 1.25},
        {{"glance-api", "image.cache_prune"}, 1.0},
        {{"cinder-scheduler", "cache.refresh_pools"}, 1.0},
        {{"nova-compute", "resource.update_usage"}, 0.75},
        {{"keystone", "token.cleanup_expired"}, 0.5},
    };
    shape.block_sizes = {13, 12, 12, 12, 12, 12};
    return materialize("sto", shape);
}

} // namespace

WorkloadTemplate preset(const std::string& name) {
    if (name == "depl") return depl_preset();
    if (name == "net") return net_preset();
    if (name == "sto") return sto_preset();
    throw ConfigError("unknown preset '" + name + "' (available: depl, net, sto)");
}

std::vector<std::string> preset_names() {
    return {"depl", "net", "sto"};
}

WorkloadTemplate scale_template(const WorkloadTemplate& tmpl, int repeat) {
    if (repeat < 1) throw ConfigError("scale_template: repeat must be >= 1");
    WorkloadTemplate out = tmpl;
    out.name = tmpl.name + "-x" + std::to_string(repeat);
    for (int r = 1; r < repeat; ++r) {
        out.blocks.insert(out.blocks.end(), tmpl.blocks.begin(), tmpl.blocks.end());
    }
    return out;
}

const char* fault_type_name(FaultType type) {
    switch (type) {
        case FaultType::ThrowException: return "throw_exception";
        case FaultType::WrongReturnValue: return "wrong_return_value";
        case FaultType::WrongParameterValue: return "wrong_parameter_value";
        case FaultType::Delay: return "delay";
    }
    return "?";
}

FaultType fault_type_from_name(const std::string& name) {
    if (name == "throw_exception") return FaultType::ThrowException;
    if (name == "wrong_return_value") return FaultType::WrongReturnValue;
    if (name == "wrong_parameter_value") return FaultType::WrongParameterValue;
    if (name == "delay") return FaultType::Delay;
    throw ParseError("unknown fault type '" + name + "'");
}

nlohmann::json FaultSpec::to_json() const {
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& p : error_events) errors.push_back({p.first, p.second});
    return nlohmann::json{
        {"type", fault_type_name(type)},
        {"block", block},
        {"event", event},
        {"manifests", manifests},
        {"truncation_length", truncation_length},
        {"error_events", std::move(errors)},
        {"substitution_span", substitution_span},
        {"propagate", propagate},
        {"propagation_blocks", propagation_blocks},
        {"delay_us", delay_us},
        {"reorder_window", reorder_window},
    };
}

FaultSpec FaultSpec::from_json(const nlohmann::json& j) {
    FaultSpec f;
    f.type = fault_type_from_name(j.at("type").get<std::string>());
    f.block = j.at("block").get<int>();
    f.event = j.at("event").get<int>();
    f.manifests = j.value("manifests", true);
    f.truncation_length = j.value("truncation_length", -1);
    for (const auto& p : j.value("error_events", nlohmann::json::array())) {
        f.error_events.push_back(pair_from_json(p, "error event"));
    }
    f.substitution_span = j.value("substitution_span", 1);
    f.propagate = j.value("propagate", false);
    f.propagation_blocks = j.value("propagation_blocks", 1);
    f.delay_us = j.value("delay_us", std::int64_t{5'000'000});
    f.reorder_window = j.value("reorder_window", 0);
    return f;
}

nlohmann::json GroundTruth::to_json() const {
    auto edits = [](const std::vector<std::pair<std::int32_t, EventPair>>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [pos, pair] : v) {
            arr.push_back({{"position", pos}, {"pair", {pair.first, pair.second}}});
        }
        return arr;
    };
    nlohmann::json j{
        {"failure_manifested", failure_manifested},
        {"background_positions", background_positions},
        {"spurious", edits(spurious)},
        {"missing", edits(missing)},
    };
    if (fault_type) j["fault_type"] = fault_type_name(*fault_type);
    return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
    GroundTruth t;
    t.failure_manifested = j.at("failure_manifested").get<bool>();
    if (j.contains("fault_type")) t.fault_type = fault_type_from_name(j.at("fault_type").get<std::string>());
    t.background_positions = j.value("background_positions", std::vector<std::int32_t>{});
    auto edits = [](const nlohmann::json& arr, std::vector<std::pair<std::int32_t, EventPair>>& out) {
        for (const auto& e : arr) {
            out.emplace_back(e.at("position").get<std::int32_t>(),
                             pair_from_json(e.at("pair"), "ground truth pair"));
        }
    };
    edits(j.value("spurious", nlohmann::json::array()), t.spurious);
    edits(j.value("missing", nlohmann::json::array()), t.missing);
    return t;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr std::int64_t kBaseTimestampUs = 1'700'000'000'000'000;
constexpr std::int64_t kStepUs = 10'000;
constexpr std::int64_t kJitterUs = 5'000; // strictly less than the step

struct GenEvent {
    EventPair pair;
    Layer layer = Layer::Internal;
    int block = -1;          // -1 for background
    int index_in_block = -1; // 0 = client call; -2 for fault-inserted events
    bool background = false;
    std::int64_t start_us = 0;
    std::int64_t duration_us = 0;
};

// Noise-only event stream: canonical expansion, benign swaps, background
// insertions, timestamps. One RNG in a fixed phase order keeps the stream a
// pure function of (template, seed, noise).
std::vector<GenEvent> build_stream(const WorkloadTemplate& tmpl, std::uint64_t seed, double noise) {
    std::vector<GenEvent> events;
    events.reserve(tmpl.canonical_size() + 32);
    for (std::size_t b = 0; b < tmpl.blocks.size(); ++b) {
        const auto& block = tmpl.blocks[b];
        events.push_back({block.client, Layer::Client, static_cast<int>(b), 0, false, 0, 0});
        for (std::size_t e = 0; e < block.internal_events.size(); ++e) {
            events.push_back({block.internal_events[e], Layer::Internal, static_cast<int>(b),
                              static_cast<int>(e) + 1, false, 0, 0});
        }
    }

    std::mt19937_64 rng = make_rng(seed, {0x57EA11});
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::size_t offset = 0;
    for (const auto& block : tmpl.blocks) {
        for (const int i : block.commutable) {
            const double draw = uniform(rng);
            if (draw < noise) {
                std::swap(events[offset + static_cast<std::size_t>(i)],
                          events[offset + static_cast<std::size_t>(i) + 1]);
            }
        }
        offset += block.size();
    }

    for (const auto& src : tmpl.background) {
        if (src.events_per_trace <= 0.0) continue;
        std::poisson_distribution<int> poisson(src.events_per_trace);
        const int count = poisson(rng);
        for (int c = 0; c < count; ++c) {
            std::uniform_int_distribution<std::size_t> where(0, events.size());
            events.insert(events.begin() + static_cast<std::ptrdiff_t>(where(rng)),
                          GenEvent{src.pair, Layer::Internal, -1, -1, true, 0, 0});
        }
    }

    std::uniform_int_distribution<std::int64_t> jitter(0, kJitterUs - 1);
    std::uniform_int_distribution<std::int64_t> duration(500, 20'000);
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].start_us = kBaseTimestampUs + static_cast<std::int64_t>(i) * kStepUs + jitter(rng);
        events[i].duration_us = duration(rng);
    }
    return events;
}

EventSequence to_sequence(const std::vector<GenEvent>& events, TraceLabel label,
                          SymbolTable& table, const std::string& trace_id) {
    EventSequence seq;
    seq.label = label;
    seq.trace_id = trace_id;
    seq.symbols.reserve(events.size());
    seq.events.reserve(events.size());
    for (const auto& ge : events) {
        Event ev;
        ev.sender = ge.pair.first;
        ev.service = ge.pair.second;
        ev.start_us = ge.start_us;
        ev.duration_us = ge.duration_us;
        ev.layer = ge.layer;
        ev.trace_id = trace_id;
        seq.symbols.push_back(table.intern(ge.pair));
        seq.events.push_back(std::move(ev));
    }
    return seq;
}

} // namespace

GeneratedTrace generate_fault_free(const WorkloadTemplate& tmpl, std::uint64_t seed, double noise,
                                   SymbolTable& table, const std::string& trace_id) {
    validate(tmpl);
    const auto events = build_stream(tmpl, seed, noise);
    GeneratedTrace out;
    out.trace = to_sequence(events, TraceLabel::FaultFree, table, trace_id);
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].background) out.truth.background_positions.push_back(static_cast<std::int32_t>(i));
    }
    return out;
}

EventSequence generate_idle(const WorkloadTemplate& tmpl, std::uint64_t seed, double duration,
                            SymbolTable& table, const std::string& trace_id) {
    if (duration < 0) throw ConfigError("generate_idle: duration must be >= 0");
    std::mt19937_64 rng = make_rng(seed, {0x1D1E});
    std::vector<GenEvent> events;
    for (const auto& src : tmpl.background) {
        const double mean = src.events_per_trace * duration;
        if (mean <= 0.0) continue;
        std::poisson_distribution<int> poisson(mean);
        const int count = poisson(rng);
        for (int c = 0; c < count; ++c) {
            std::uniform_int_distribution<std::size_t> where(0, events.size());
            events.insert(events.begin() + static_cast<std::ptrdiff_t>(where(rng)),
                          GenEvent{src.pair, Layer::Internal, -1, -1, true, 0, 0});
        }
    }
    std::uniform_int_distribution<std::int64_t> jitter(0, kJitterUs - 1);
    std::uniform_int_distribution<std::int64_t> dur(500, 20'000);
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].start_us = kBaseTimestampUs + static_cast<std::int64_t>(i) * kStepUs + jitter(rng);
        events[i].duration_us = dur(rng);
    }
    return to_sequence(events, TraceLabel::Idle, table, trace_id);
}

namespace {

EventPair default_error_pair(const EventPair& target, FaultType type) {
    switch (type) {
        case FaultType::ThrowException: return {target.first, "fault.exception"};
        case FaultType::WrongReturnValue: return {target.first, target.second + ".wrong_return"};
        case FaultType::WrongParameterValue: return {target.first, target.second + ".wrong_param"};
        case FaultType::Delay: return {target.first, "fault.delay"};
    }
    return {target.first, "fault"};
}

} // namespace

GeneratedTrace inject_fault(const WorkloadTemplate& tmpl, const FaultSpec& fault,
                            std::uint64_t seed, double noise, SymbolTable& table,
                            const std::string& trace_id) {
    validate(tmpl);
    if (fault.block < 0 || static_cast<std::size_t>(fault.block) >= tmpl.blocks.size() ||
        fault.event < 0 ||
        static_cast<std::size_t>(fault.event) >= tmpl.blocks[static_cast<std::size_t>(fault.block)].size()) {
        throw DataError("inject_fault: injection point (block " + std::to_string(fault.block) +
                        ", event " + std::to_string(fault.event) + ") is outside the template");
    }

    std::vector<GenEvent> stream = build_stream(tmpl, seed, noise);

    GroundTruth truth;
    truth.fault_type = fault.type;
    truth.failure_manifested = fault.manifests;

    if (!fault.manifests) {
        GeneratedTrace out;
        for (std::size_t i = 0; i < stream.size(); ++i) {
            if (stream[i].background) truth.background_positions.push_back(static_cast<std::int32_t>(i));
        }
        out.trace = to_sequence(stream, TraceLabel::FaultInjected, table, trace_id);
        out.truth = std::move(truth);
        return out;
    }

    std::size_t injection_pos = stream.size();
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (!stream[i].background && stream[i].block == fault.block &&
            stream[i].index_in_block == fault.event) {
            injection_pos = i;
            break;
        }
    }

    // Edit plan in pre-fault coordinates.
    std::set<std::size_t> removed;
    std::map<std::size_t, EventPair> substituted;
    std::vector<EventPair> inserted;

    const EventPair& target_pair = stream[injection_pos].pair;
    switch (fault.type) {
        case FaultType::ThrowException: {
            std::vector<std::pair<int, std::size_t>> tail; // (index_in_block, position)
            for (std::size_t i = 0; i < stream.size(); ++i) {
                if (!stream[i].background && stream[i].block == fault.block &&
                    stream[i].index_in_block > fault.event) {
                    tail.emplace_back(stream[i].index_in_block, i);
                }
            }
            std::sort(tail.begin(), tail.end());
            const std::size_t limit =
                fault.truncation_length < 0 ? tail.size()
                                            : std::min<std::size_t>(tail.size(),
                                                                    static_cast<std::size_t>(fault.truncation_length));
            for (std::size_t k = 0; k < limit; ++k) removed.insert(tail[k].second);
            inserted = fault.error_events.empty()
                           ? std::vector<EventPair>{default_error_pair(target_pair, fault.type)}
                           : fault.error_events;
            break;
        }
        case FaultType::WrongReturnValue:
        case FaultType::WrongParameterValue: {
            std::vector<std::pair<int, std::size_t>> downstream;
            for (std::size_t i = 0; i < stream.size(); ++i) {
                if (!stream[i].background && stream[i].block == fault.block &&
                    stream[i].index_in_block > fault.event) {
                    downstream.emplace_back(stream[i].index_in_block, i);
                }
            }
            std::sort(downstream.begin(), downstream.end());
            const std::size_t span =
                std::min<std::size_t>(downstream.size(), static_cast<std::size_t>(std::max(0, fault.substitution_span)));
            for (std::size_t k = 0; k < span; ++k) {
                const std::size_t pos = downstream[k].second;
                const EventPair repl =
                    fault.error_events.empty()
                        ? default_error_pair(stream[pos].pair, fault.type)
                        : fault.error_events[k % fault.error_events.size()];
                substituted.emplace(pos, repl);
            }
            break;
        }
        case FaultType::Delay:
            break; // timestamp-only edits below
    }

    if (fault.propagate && fault.type != FaultType::Delay) {
        const int last_block = fault.block + std::max(0, fault.propagation_blocks);
        for (std::size_t i = 0; i < stream.size(); ++i) {
            if (!stream[i].background && stream[i].block > fault.block && stream[i].block <= last_block) {
                removed.insert(i);
            }
        }
    }

    // Apply the plan, recording ground truth in both coordinate systems.
    std::vector<GenEvent> final_events;
    final_events.reserve(stream.size() + inserted.size());
    for (std::size_t p = 0; p < stream.size(); ++p) {
        if (removed.count(p)) {
            truth.missing.emplace_back(static_cast<std::int32_t>(p), stream[p].pair);
        } else if (auto it = substituted.find(p); it != substituted.end()) {
            truth.missing.emplace_back(static_cast<std::int32_t>(p), stream[p].pair);
            GenEvent repl = stream[p];
            repl.pair = it->second;
            repl.index_in_block = -2;
            truth.spurious.emplace_back(static_cast<std::int32_t>(final_events.size()), repl.pair);
            final_events.push_back(std::move(repl));
        } else {
            final_events.push_back(stream[p]);
        }
        if (p == injection_pos) {
            for (std::size_t k = 0; k < inserted.size(); ++k) {
                GenEvent err;
                err.pair = inserted[k];
                err.layer = Layer::Internal;
                err.block = stream[p].block;
                err.index_in_block = -2;
                err.start_us = stream[p].start_us + 1'000 * static_cast<std::int64_t>(k + 1);
                err.duration_us = 800;
                truth.spurious.emplace_back(static_cast<std::int32_t>(final_events.size()), err.pair);
                final_events.push_back(std::move(err));
            }
        }
    }

    if (fault.type == FaultType::Delay) {
        std::size_t inj_final = 0;
        for (std::size_t i = 0; i < final_events.size(); ++i) {
            if (!final_events[i].background && final_events[i].block == fault.block &&
                final_events[i].index_in_block == fault.event) {
                inj_final = i;
                break;
            }
        }
        final_events[inj_final].duration_us += fault.delay_us;
        for (std::size_t i = inj_final + 1; i < final_events.size(); ++i) {
            final_events[i].start_us += fault.delay_us;
        }
        if (fault.reorder_window > 0 && inj_final + 2 < final_events.size()) {
            const std::size_t first = inj_final + 1;
            const std::size_t last =
                std::min(final_events.size() - 1, inj_final + static_cast<std::size_t>(fault.reorder_window));
            if (last > first) {
                // Rotate occupants left by one; timestamps stay with the slots.
                std::vector<std::int64_t> starts, durations;
                for (std::size_t i = first; i <= last; ++i) {
                    starts.push_back(final_events[i].start_us);
                    durations.push_back(final_events[i].duration_us);
                }
                const GenEvent moved = final_events[first];
                for (std::size_t i = first; i < last; ++i) final_events[i] = final_events[i + 1];
                final_events[last] = moved;
                for (std::size_t i = first; i <= last; ++i) {
                    final_events[i].start_us = starts[i - first];
                    final_events[i].duration_us = durations[i - first];
                }
                truth.missing.emplace_back(static_cast<std::int32_t>(first), moved.pair);
                truth.spurious.emplace_back(static_cast<std::int32_t>(last), moved.pair);
            }
        }
    }

    for (std::size_t i = 0; i < final_events.size(); ++i) {
        if (final_events[i].background) truth.background_positions.push_back(static_cast<std::int32_t>(i));
    }

    GeneratedTrace out;
    out.trace = to_sequence(final_events, TraceLabel::FaultInjected, table, trace_id);
    out.truth = std::move(truth);
    return out;
}

FaultSpec random_fault(const WorkloadTemplate& tmpl, std::mt19937_64& rng, const FaultMix& mix) {
    if (tmpl.blocks.empty()) throw ConfigError("random_fault: template has no request blocks");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    FaultSpec fault;
    fault.manifests = uniform(rng) >= mix.non_manifesting;

    const double total = mix.throw_exception + mix.wrong_return + mix.wrong_parameter + mix.delay;
    if (total <= 0) throw ConfigError("random_fault: fault mix has no positive weight");
    const double draw = uniform(rng) * total;
    if (draw < mix.throw_exception) {
        fault.type = FaultType::ThrowException;
    } else if (draw < mix.throw_exception + mix.wrong_return) {
        fault.type = FaultType::WrongReturnValue;
    } else if (draw < mix.throw_exception + mix.wrong_return + mix.wrong_parameter) {
        fault.type = FaultType::WrongParameterValue;
    } else {
        fault.type = FaultType::Delay;
    }

    std::uniform_int_distribution<int> pick_block(0, static_cast<int>(tmpl.blocks.size()) - 1);
    fault.block = pick_block(rng);
    const int block_len = static_cast<int>(tmpl.blocks[static_cast<std::size_t>(fault.block)].size());

    switch (fault.type) {
        case FaultType::ThrowException: {
            std::uniform_int_distribution<int> pick_event(0, block_len - 1);
            fault.event = pick_event(rng);
            fault.truncation_length = -1;
            fault.propagate = uniform(rng) < 0.30;
            fault.propagation_blocks = 1;
            break;
        }
        case FaultType::WrongReturnValue:
        case FaultType::WrongParameterValue: {
            // Keep at least one downstream event so the substitution is real.
            std::uniform_int_distribution<int> pick_event(0, std::max(0, block_len - 2));
            fault.event = pick_event(rng);
            std::uniform_int_distribution<int> span(1, 3);
            fault.substitution_span = span(rng);
            fault.propagate = uniform(rng) < 0.20;
            fault.propagation_blocks = 1;
            break;
        }
        case FaultType::Delay: {
            std::uniform_int_distribution<int> pick_event(0, block_len - 1);
            fault.event = pick_event(rng);
            std::uniform_int_distribution<int> secs(1, 10);
            fault.delay_us = static_cast<std::int64_t>(secs(rng)) * 1'000'000;
            fault.reorder_window = 0;
            break;
        }
    }
    return fault;
}

std::vector<EventSequence> make_fault_free_corpus(const WorkloadTemplate& tmpl, int count,
                                                  std::uint64_t seed, double noise,
                                                  SymbolTable& table) {
    std::vector<EventSequence> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "ff-%04d", i);
        out.push_back(
            generate_fault_free(tmpl, derive_seed(seed, {0xFF, static_cast<std::uint64_t>(i)}), noise, table, id)
                .trace);
    }
    return out;
}

std::vector<EventSequence> make_idle_corpus(const WorkloadTemplate& tmpl, int count,
                                            std::uint64_t seed, double duration,
                                            SymbolTable& table) {
    std::vector<EventSequence> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof(id), "idle-%03d", i);
        out.push_back(
            generate_idle(tmpl, derive_seed(seed, {0x1D, static_cast<std::uint64_t>(i)}), duration, table, id));
    }
    return out;
}

std::vector<GeneratedTrace> make_experiments(const WorkloadTemplate& tmpl, int count,
                                             std::uint64_t seed, double noise,
                                             const FaultMix& mix, SymbolTable& table) {
    std::vector<GeneratedTrace> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 fault_rng = make_rng(seed, {0xFA, static_cast<std::uint64_t>(i)});
        const FaultSpec fault = random_fault(tmpl, fault_rng, mix);
        char id[32];
        std::snprintf(id, sizeof(id), "exp-%04d", i);
        out.push_back(inject_fault(tmpl, fault,
                                   derive_seed(seed, {0xE5, static_cast<std::uint64_t>(i)}), noise,
                                   table, id));
    }
    return out;
}

std::vector<Symbol> reconstruct_pre_fault(const EventSequence& injected, const GroundTruth& truth,
                                          SymbolTable& table) {
    std::vector<Symbol> symbols = injected.symbols;
    std::vector<std::int32_t> drop;
    drop.reserve(truth.spurious.size());
    for (const auto& [pos, pair] : truth.spurious) drop.push_back(pos);
    std::sort(drop.rbegin(), drop.rend());
    for (const std::int32_t pos : drop) {
        symbols.erase(symbols.begin() + pos);
    }
    auto missing = truth.missing;
    std::sort(missing.begin(), missing.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [pos, pair] : missing) {
        symbols.insert(symbols.begin() + pos, table.intern(pair));
    }
    return symbols;
}

} // namespace tracelens
