#include <sstream>

#include "ctig/graph.hpp"

namespace ctig {

namespace {

std::string dot_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c == '\n' ? ' ' : c);
    }
    return out;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

std::string export_dot(const AttackGraph& g) {
    AttackGraph c = canonicalize(g);
    std::ostringstream out;
    out << "digraph attack_graph {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box, style=rounded];\n";
    for (const Entity& e : c.entities) {
        out << "  \"" << dot_escape(e.id) << "\" [label=\"" << dot_escape(e.name) << "\\n("
            << dot_escape(e.entity_type) << ")\"];\n";
    }
    for (const AtomicEvent& ev : c.events) {
        out << "  \"" << dot_escape(ev.subject) << "\" -> \"" << dot_escape(ev.object)
            << "\" [label=\"" << dot_escape(ev.action) << "\"";
        if (!ev.techniques.empty()) {
            out << ", tooltip=\"" << dot_escape(join(ev.techniques, ", ")) << "\"";
        }
        out << "];\n";
    }
    for (const SupplementaryRelation& r : c.supplementary) {
        out << "  \"" << dot_escape(r.subject) << "\" -> \"" << dot_escape(r.object)
            << "\" [label=\"" << dot_escape(r.relation) << "\", style=dashed];\n";
    }
    out << "}\n";
    return out.str();
}

namespace {

// Self-contained viewer: embedded data, inline force layout, no fetches.
constexpr const char* kHtmlPrefix = R"html(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Attack graph</title>
<style>
  body { margin: 0; font-family: sans-serif; background: #16181d; color: #e4e6eb; }
  #title { position: absolute; top: 10px; left: 14px; font-size: 15px; }
  #legend { position: absolute; bottom: 10px; left: 14px; font-size: 12px; color: #9aa0aa; }
  canvas { display: block; }
</style>
</head>
<body>
<div id="title"></div>
<div id="legend">solid: timed action &nbsp; dashed: supplementary link &nbsp; drag to pan</div>
<canvas id="view"></canvas>
<script id="graph-data" type="application/json">
)html";

constexpr const char* kHtmlSuffix = R"html(
</script>
<script>
(function () {
  const graph = JSON.parse(document.getElementById("graph-data").textContent);
  document.getElementById("title").textContent = "Attack graph: " + graph.report_id;
  document.title = "Attack graph: " + graph.report_id;
  const canvas = document.getElementById("view");
  const ctx = canvas.getContext("2d");
  const nodes = graph.entities.map(function (e, i) {
    return { id: e.id, name: e.name, type: e.type, provenance: e.provenance,
             x: Math.cos(i * 2.399) * (40 + 22 * i), y: Math.sin(i * 2.399) * (40 + 22 * i),
             vx: 0, vy: 0 };
  });
  const index = {};
  nodes.forEach(function (n) { index[n.id] = n; });
  const edges = [];
  graph.events.forEach(function (ev) {
    edges.push({ s: index[ev.subject], t: index[ev.object],
                 label: ev.label_with_techniques, dashed: false });
  });
  graph.supplementary.forEach(function (r) {
    edges.push({ s: index[r.subject], t: index[r.object], label: r.relation, dashed: true });
  });
  let panX = 0, panY = 0, dragging = false, lastX = 0, lastY = 0;
  canvas.addEventListener("mousedown", function (e) { dragging = true; lastX = e.clientX; lastY = e.clientY; });
  window.addEventListener("mouseup", function () { dragging = false; });
  window.addEventListener("mousemove", function (e) {
    if (dragging) { panX += e.clientX - lastX; panY += e.clientY - lastY; lastX = e.clientX; lastY = e.clientY; }
  });
  function step() {
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const a = nodes[i], b = nodes[j];
        let dx = a.x - b.x, dy = a.y - b.y;
        let d2 = dx * dx + dy * dy + 0.01;
        const f = 2600 / d2;
        const d = Math.sqrt(d2);
        dx /= d; dy /= d;
        a.vx += dx * f; a.vy += dy * f;
        b.vx -= dx * f; b.vy -= dy * f;
      }
    }
    edges.forEach(function (e) {
      if (!e.s || !e.t) return;
      const dx = e.t.x - e.s.x, dy = e.t.y - e.s.y;
      const d = Math.sqrt(dx * dx + dy * dy) + 0.01;
      const f = (d - 130) * 0.01;
      e.s.vx += (dx / d) * f; e.s.vy += (dy / d) * f;
      e.t.vx -= (dx / d) * f; e.t.vy -= (dy / d) * f;
    });
    nodes.forEach(function (n) {
      n.vx *= 0.82; n.vy *= 0.82;
      n.x += Math.max(-6, Math.min(6, n.vx));
      n.y += Math.max(-6, Math.min(6, n.vy));
    });
  }
  function draw() {
    canvas.width = window.innerWidth;
    canvas.height = window.innerHeight;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.save();
    ctx.translate(canvas.width / 2 + panX, canvas.height / 2 + panY);
    ctx.font = "11px sans-serif";
    edges.forEach(function (e) {
      if (!e.s || !e.t) return;
      ctx.strokeStyle = e.dashed ? "#6a7180" : "#8ab4f8";
      ctx.setLineDash(e.dashed ? [5, 4] : []);
      ctx.beginPath();
      ctx.moveTo(e.s.x, e.s.y);
      ctx.lineTo(e.t.x, e.t.y);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillStyle = "#b8bdc7";
      ctx.fillText(e.label, (e.s.x + e.t.x) / 2 + 4, (e.s.y + e.t.y) / 2 - 4);
    });
    nodes.forEach(function (n) {
      ctx.fillStyle = n.provenance === "image" ? "#f28b82" : n.provenance === "merged" ? "#fdd663" : "#81c995";
      ctx.beginPath();
      ctx.arc(n.x, n.y, 7, 0, Math.PI * 2);
      ctx.fill();
      ctx.fillStyle = "#e4e6eb";
      ctx.fillText(n.name + " (" + n.type + ")", n.x + 10, n.y + 4);
    });
    ctx.restore();
    step();
    requestAnimationFrame(draw);
  }
  draw();
})();
</script>
</body>
</html>
)html";

}  // namespace

std::string export_html(const AttackGraph& g) {
    AttackGraph c = canonicalize(g);
    nlohmann::json data;
    data["report_id"] = c.report_id;
    data["entities"] = nlohmann::json::array();
    for (const Entity& e : c.entities) {
        data["entities"].push_back({{"id", e.id},
                                    {"name", e.name},
                                    {"type", e.entity_type},
                                    {"provenance", std::string(provenance_name(e.provenance))}});
    }
    data["events"] = nlohmann::json::array();
    for (const AtomicEvent& ev : c.events) {
        std::string label = ev.action;
        if (!ev.techniques.empty()) label += " [" + join(ev.techniques, ", ") + "]";
        data["events"].push_back({{"subject", ev.subject},
                                  {"object", ev.object},
                                  {"label_with_techniques", label}});
    }
    data["supplementary"] = nlohmann::json::array();
    for (const SupplementaryRelation& r : c.supplementary) {
        data["supplementary"].push_back(
            {{"subject", r.subject}, {"relation", r.relation}, {"object", r.object}});
    }
    std::string payload = data.dump(2);
    // Keep the inline <script> block intact whatever the data contains.
    std::string safe;
    safe.reserve(payload.size());
    for (std::size_t i = 0; i < payload.size(); ++i) {
        if (payload[i] == '<') {
            safe += "\\u003c";
        } else {
            safe.push_back(payload[i]);
        }
    }
    return std::string(kHtmlPrefix) + safe + kHtmlSuffix;
}

std::string graph_triplet_listing(const AttackGraph& g) {
    AttackGraph c = canonicalize(g);
    std::ostringstream out;
    for (const AtomicEvent& ev : c.events) {
        const Entity* s = c.find_entity(ev.subject);
        const Entity* o = c.find_entity(ev.object);
        out << (s != nullptr ? s->name : ev.subject) << " --" << ev.action << "--> "
            << (o != nullptr ? o->name : ev.object);
        if (!ev.techniques.empty()) out << " [" << join(ev.techniques, ", ") << "]";
        out << " (t=" << ev.timestamp << ")\n";
    }
    for (const SupplementaryRelation& r : c.supplementary) {
        const Entity* s = c.find_entity(r.subject);
        const Entity* o = c.find_entity(r.object);
        out << (s != nullptr ? s->name : r.subject) << " --" << r.relation << "--> "
            << (o != nullptr ? o->name : r.object) << " (supplementary)\n";
    }
    return out.str();
}

}  // namespace ctig
