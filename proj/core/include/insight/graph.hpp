#pragma once

#include <map>
#include <string>
#include <vector>

#include "insight/events.hpp"

namespace insight {

// Undirected weighted interaction graph over users and resources. Node ids
// are namespaced: "user:<id>", "pc:<id>", "dom:<registrable domain>".
class InteractionGraph {
public:
    int add_node(const std::string& id);
    int node_index(const std::string& id) const; // -1 when absent
    void add_interaction(const std::string& a, const std::string& b); // weight += 1
    void add_edge(int a, int b, double w);

    int node_count() const { return static_cast<int>(ids_.size()); }
    const std::string& node_id(int i) const { return ids_[i]; }
    const std::vector<std::pair<int, double>>& neighbors(int i) const { return adj_[i]; }
    double edge_weight(int a, int b) const; // 0 when absent
    bool has_edge(int a, int b) const { return edge_weight(a, b) > 0.0; }
    size_t edge_count() const;

private:
    std::vector<std::string> ids_;
    std::map<std::string, int> index_;
    std::vector<std::vector<std::pair<int, double>>> adj_; // sorted by neighbor
};

// user--pc from logons, file and device events; user--domain from http;
// user--user from email sender to each recipient (self edges skipped).
InteractionGraph build_interaction_graph(const std::vector<LogEvent>& events);

// Host collapsed to its last two labels ("a.b.c.com" -> "c.com").
std::string registrable_domain(const std::string& url);

} // namespace insight
