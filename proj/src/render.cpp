#include "atomr/render.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace atomr {

namespace {

std::string node_block(const Node& n, std::size_t step) {
    std::ostringstream out;
    out << "### Step " << step << ": " << display_name(n.action) << " [node " << n.id.value << "]";
    if (n.revised()) out << " (revised)";
    if (n.flagged) out << " (flagged)";
    out << '\n' << n.content;
    if (n.content.empty() || n.content.back() != '\n') out << '\n';
    return out.str();
}

std::string elision_line(std::size_t count) {
    std::ostringstream out;
    out << kElisionMarker << count << (count == 1 ? " earlier step" : " earlier steps") << " ...]\n";
    return out.str();
}

struct ChainView {
    const Chain* chain = nullptr;
    std::string header;
    std::string summary;         // replaces the nodes off the active path
    std::vector<std::string> nodes;
    std::size_t elided = 0;      // leading nodes dropped
};

std::string assemble(const std::string& head, const std::vector<ChainView>& views) {
    std::string out = head;
    for (const auto& v : views) {
        out += '\n';
        out += v.header;
        if (v.elided > 0) out += elision_line(v.elided);
        for (std::size_t i = v.elided; i < v.nodes.size(); ++i) out += v.nodes[i];
        out += v.summary;
    }
    return out;
}

// Cut at a UTF-8 character boundary at or below `limit`.
std::string clip(std::string text, std::size_t limit) {
    if (text.size() <= limit) return text;
    std::size_t cut = limit;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    text.resize(cut);
    return text;
}

}  // namespace

std::size_t first_step_number(const AtomicTree& tree, ChainId chain) {
    const auto path = tree.path_to(chain);
    return path.size() - tree.chain(chain).nodes.size() + 1;
}

std::string render_steps(const AtomicTree& tree, const std::vector<NodeId>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) out += node_block(tree.node(path[i]), i + 1);
    return out;
}

std::string render_tree(const AtomicTree& tree, std::size_t budget) {
    std::string head = "# Problem\n" + tree.problem().statement;
    if (head.back() != '\n') head += '\n';

    const auto path = tree.active_path();
    std::vector<ChainView> views;
    for (const auto& [id, chain] : tree.chains()) {
        ChainView v;
        v.chain = &chain;
        std::ostringstream h;
        h << "## Chain " << id.value << " (" << to_string(chain.status);
        if (chain.parent) {
            h << ", branched from chain " << chain.parent->chain.value << " at step "
              << first_step_number(tree, id) - 1;
        }
        h << ")\n";
        v.header = h.str();
        const bool active = id == tree.active_chain_id() && !tree.terminated();
        if (!active && chain.summary) {
            // Steps shared with the active path stay visible above the summary.
            std::size_t step = first_step_number(tree, id);
            for (NodeId nid : chain.nodes) {
                if (std::find(path.begin(), path.end(), nid) == path.end()) break;
                v.nodes.push_back(node_block(tree.node(nid), step++));
            }
            v.summary = "Summary: " + *chain.summary;
            if (v.summary.back() != '\n') v.summary += '\n';
        } else {
            std::size_t step = first_step_number(tree, id);
            for (NodeId nid : chain.nodes) v.nodes.push_back(node_block(tree.node(nid), step++));
            if (chain.nodes.empty()) v.nodes.push_back("(no steps yet)\n");
        }
        views.push_back(std::move(v));
    }

    std::string out = assemble(head, views);
    if (out.size() <= budget) return out;

    // Elision order: non-active chains first (creation order), then the active one.
    std::vector<std::size_t> order;
    std::size_t active_index = views.size();
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].chain->id == tree.active_chain_id()) {
            active_index = i;
        } else {
            order.push_back(i);
        }
    }
    if (active_index < views.size()) order.push_back(active_index);

    for (std::size_t idx : order) {
        auto& v = views[idx];
        if (v.nodes.empty() || v.chain->nodes.empty()) continue;
        const std::size_t keep = idx == active_index ? std::min<std::size_t>(3, v.nodes.size()) : 0;
        while (v.nodes.size() - v.elided > keep) {
            ++v.elided;
            out = assemble(head, views);
            if (out.size() <= budget) return out;
        }
    }
    return clip(std::move(out), budget);
}

}  // namespace atomr
