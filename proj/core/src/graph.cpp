#include "insight/graph.hpp"

#include <algorithm>

namespace insight {

int InteractionGraph::add_node(const std::string& id) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    int idx = static_cast<int>(ids_.size());
    ids_.push_back(id);
    index_.emplace(id, idx);
    adj_.emplace_back();
    return idx;
}

int InteractionGraph::node_index(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

void InteractionGraph::add_edge(int a, int b, double w) {
    if (a == b) return; // no self-loops
    for (auto* side : {&adj_[a], &adj_[b]}) {
        int other = (side == &adj_[a]) ? b : a;
        auto it = std::lower_bound(side->begin(), side->end(), other,
                                   [](const auto& p, int v) { return p.first < v; });
        if (it != side->end() && it->first == other) {
            it->second += w;
        } else {
            side->insert(it, {other, w});
        }
    }
}

void InteractionGraph::add_interaction(const std::string& a, const std::string& b) {
    int ia = add_node(a);
    int ib = add_node(b);
    add_edge(ia, ib, 1.0);
}

double InteractionGraph::edge_weight(int a, int b) const {
    const auto& side = adj_[a];
    auto it = std::lower_bound(side.begin(), side.end(), b,
                               [](const auto& p, int v) { return p.first < v; });
    return (it != side.end() && it->first == b) ? it->second : 0.0;
}

size_t InteractionGraph::edge_count() const {
    size_t twice = 0;
    for (const auto& side : adj_) twice += side.size();
    return twice / 2;
}

std::string registrable_domain(const std::string& url) {
    std::string host = url;
    auto scheme = host.find("://");
    if (scheme != std::string::npos) host = host.substr(scheme + 3);
    auto slash = host.find('/');
    if (slash != std::string::npos) host = host.substr(0, slash);
    auto port = host.find(':');
    if (port != std::string::npos) host = host.substr(0, port);
    for (auto& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    // keep last two labels
    auto last = host.rfind('.');
    if (last == std::string::npos || last == 0) return host;
    auto prev = host.rfind('.', last - 1);
    return prev == std::string::npos ? host : host.substr(prev + 1);
}

namespace {

std::string address_local_part(const std::string& addr) {
    auto at = addr.find('@');
    return at == std::string::npos ? addr : addr.substr(0, at);
}

} // namespace

InteractionGraph build_interaction_graph(const std::vector<LogEvent>& events) {
    InteractionGraph g;
    for (const auto& e : events) {
        std::string user_node = "user:" + e.user;
        switch (e.type) {
            case EventType::logon:
            case EventType::device_connect:
            case EventType::device_disconnect:
            case EventType::file:
                g.add_interaction(user_node, "pc:" + e.pc);
                break;
            case EventType::http:
                g.add_interaction(user_node, "dom:" + registrable_domain(e.resource));
                break;
            case EventType::email: {
                const std::string& sender = e.user;
                for (const auto& peer : e.peers) {
                    std::string local = address_local_part(peer);
                    if (local.empty() || local == sender) continue;
                    g.add_interaction(user_node, "user:" + local);
                }
                break;
            }
            case EventType::logoff:
                break; // mirrors the logon edge
        }
    }
    return g;
}

} // namespace insight
