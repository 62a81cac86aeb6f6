#include "dualmac/trace.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dualmac/errors.hpp"

namespace dualmac {

std::string model_name(Model m) {
    return m == Model::standard ? "standard" : "enhanced";
}

Model model_from_name(const std::string& name) {
    if (name == "standard") return Model::standard;
    if (name == "enhanced") return Model::enhanced;
    throw ParseError("unknown model '" + name + "'");
}

void EngineConfig::validate() const {
    if (!(Rational(0) < f_prog) || !(f_prog <= f_ack))
        throw InvalidParameter("EngineConfig: need 0 < f_prog <= f_ack");
    if (eps_abort.is_negative())
        throw InvalidParameter("EngineConfig: eps_abort must be >= 0");
    if (zero_delay_budget < 1)
        throw InvalidParameter("EngineConfig: zero_delay_budget must be >= 1");
}

std::string event_kind_name(EventKind k) {
    switch (k) {
    case EventKind::arrive: return "arrive";
    case EventKind::bcast: return "bcast";
    case EventKind::rcv: return "rcv";
    case EventKind::ack: return "ack";
    case EventKind::abort: return "abort";
    case EventKind::timer_set: return "timer_set";
    case EventKind::timer_fire: return "timer_fire";
    }
    return "?";
}

EventKind event_kind_from_name(const std::string& name) {
    static const std::unordered_map<std::string, EventKind> table = {
        {"arrive", EventKind::arrive},   {"bcast", EventKind::bcast},
        {"rcv", EventKind::rcv},         {"ack", EventKind::ack},
        {"abort", EventKind::abort},     {"timer_set", EventKind::timer_set},
        {"timer_fire", EventKind::timer_fire},
    };
    auto it = table.find(name);
    if (it == table.end()) throw ParseError("unknown event kind '" + name + "'");
    return it->second;
}

bool MessageInstance::delivered_to(int node) const {
    return std::any_of(rcv_events.begin(), rcv_events.end(),
                       [node](const auto& e) { return e.first == node; });
}

void Trace::rebuild_instances() {
    instances.clear();
    open_at_horizon.clear();
    std::unordered_map<int, std::size_t> index;
    for (const Event& e : events) {
        switch (e.kind) {
        case EventKind::bcast: {
            if (index.count(e.instance))
                throw ParseError("trace: duplicate bcast for instance " +
                                 std::to_string(e.instance));
            MessageInstance inst;
            inst.id = e.instance;
            inst.sender = e.node;
            inst.payload = e.payload;
            inst.bcast_at = e.time;
            inst.bcast_seq = e.seq;
            index[e.instance] = instances.size();
            instances.push_back(std::move(inst));
            break;
        }
        case EventKind::rcv: {
            auto it = index.find(e.instance);
            if (it == index.end())
                throw ParseError("trace: rcv for unknown instance " +
                                 std::to_string(e.instance));
            instances[it->second].rcv_events.emplace_back(e.node, e.time);
            break;
        }
        case EventKind::ack:
        case EventKind::abort: {
            auto it = index.find(e.instance);
            if (it == index.end())
                throw ParseError("trace: termination for unknown instance " +
                                 std::to_string(e.instance));
            MessageInstance& inst = instances[it->second];
            // Keep the first termination; the checker reports duplicates.
            if (!inst.terminated()) {
                inst.term = e.kind == EventKind::ack ? MessageInstance::Term::acked
                                                     : MessageInstance::Term::aborted;
                inst.term_time = e.time;
                inst.term_seq = e.seq;
            }
            break;
        }
        default:
            break;
        }
    }
    for (const MessageInstance& inst : instances)
        if (!inst.terminated()) open_at_horizon.push_back(inst.id);
}

static nlohmann::json event_to_json(const Event& e) {
    nlohmann::json j;
    j["seq"] = e.seq;
    j["t"] = e.time.str();
    j["kind"] = event_kind_name(e.kind);
    j["node"] = e.node;
    if (e.instance >= 0) j["instance"] = e.instance;
    if (e.payload >= 0) j["payload"] = e.payload;
    if (e.from >= 0) j["from"] = e.from;
    if (e.reliable >= 0) j["reliable"] = e.reliable != 0;
    return j;
}

std::string Trace::to_jsonl() const {
    std::ostringstream out;
    nlohmann::json header;
    header["type"] = "header";
    header["model"] = model_name(config.model);
    header["f_ack"] = config.f_ack.str();
    header["f_prog"] = config.f_prog.str();
    header["eps_abort"] = config.eps_abort.str();
    header["zero_delay_budget"] = config.zero_delay_budget;
    header["n"] = n;
    header["horizon"] = horizon.str();
    out << header.dump() << "\n";
    for (const Event& e : events) out << event_to_json(e).dump() << "\n";
    nlohmann::json trailer;
    trailer["type"] = "end";
    trailer["events"] = events.size();
    if (!digests.empty()) {
        nlohmann::json d = nlohmann::json::object();
        for (const auto& [node, digest] : digests) d[std::to_string(node)] = digest;
        trailer["digests"] = d;
    }
    out << trailer.dump() << "\n";
    return out.str();
}

Trace Trace::from_jsonl(const std::string& text) {
    Trace trace;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("trace JSONL: ") + e.what());
        }
        try {
            if (j.contains("type")) {
                std::string type = j["type"].get<std::string>();
                if (type == "header") {
                    trace.config.model = model_from_name(j.at("model").get<std::string>());
                    trace.config.f_ack = Rational::parse(j.at("f_ack").get<std::string>());
                    trace.config.f_prog = Rational::parse(j.at("f_prog").get<std::string>());
                    trace.config.eps_abort =
                        Rational::parse(j.at("eps_abort").get<std::string>());
                    if (j.contains("zero_delay_budget"))
                        trace.config.zero_delay_budget = j["zero_delay_budget"].get<int>();
                    trace.n = j.at("n").get<int>();
                    trace.horizon = Rational::parse(j.at("horizon").get<std::string>());
                    have_header = true;
                } else if (type == "end") {
                    if (j.contains("digests")) {
                        for (auto it = j["digests"].begin(); it != j["digests"].end(); ++it)
                            trace.digests[std::stoi(it.key())] = it.value().get<std::string>();
                    }
                }
                continue;
            }
            Event e;
            e.seq = j.at("seq").get<std::int64_t>();
            e.time = Rational::parse(j.at("t").get<std::string>());
            e.kind = event_kind_from_name(j.at("kind").get<std::string>());
            e.node = j.at("node").get<int>();
            if (j.contains("instance")) e.instance = j["instance"].get<int>();
            if (j.contains("payload")) e.payload = j["payload"].get<int>();
            if (j.contains("from")) e.from = j["from"].get<int>();
            if (j.contains("reliable")) e.reliable = j["reliable"].get<bool>() ? 1 : 0;
            trace.events.push_back(e);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("trace JSONL: ") + e.what());
        }
    }
    if (!have_header) throw ParseError("trace JSONL: missing header line");
    trace.rebuild_instances();
    return trace;
}

} // namespace dualmac
