#pragma once

#include "occkit/grid.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace occkit {

class TaxonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SemanticClass {
    SemanticId id = 0;
    std::string name;
    bool is_stuff = false;
    bool is_dynamic = false;
    int priority = 0;  // z-tie rank: higher ranks are written later and win
};

// Class id -> rank used to order equal-elevation writes.
using PriorityTable = std::map<SemanticId, int>;

class SemanticTaxonomy {
public:
    SemanticTaxonomy() = default;

    explicit SemanticTaxonomy(std::vector<SemanticClass> classes) : classes_(std::move(classes)) {
        std::set<std::string> names;
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            if (classes_[i].id != i + 1) throw TaxonomyError("class ids must be dense from 1");
            if (!names.insert(classes_[i].name).second)
                throw TaxonomyError("duplicate class name '" + classes_[i].name + "'");
        }
    }

    const std::vector<SemanticClass>& classes() const { return classes_; }
    std::size_t size() const { return classes_.size(); }

    const SemanticClass& at(SemanticId id) const {
        if (id == 0 || id > classes_.size()) throw TaxonomyError("unknown class id " + std::to_string(id));
        return classes_[id - 1];
    }

    std::optional<SemanticId> find(const std::string& name) const {
        for (const auto& c : classes_)
            if (c.name == name) return c.id;
        return std::nullopt;
    }

    SemanticId id(const std::string& name) const {
        if (auto found = find(name)) return *found;
        throw TaxonomyError("unknown class name '" + name + "'");
    }

    PriorityTable priorities() const {
        PriorityTable table;
        for (const auto& c : classes_)
            if (c.priority != 0) table[c.id] = c.priority;
        return table;
    }

    std::set<SemanticId> dynamic_classes() const {
        std::set<SemanticId> out;
        for (const auto& c : classes_)
            if (c.is_dynamic) out.insert(c.id);
        return out;
    }

    // 30 classes; the first fifteen follow the benchmark's reporting order.
    static const SemanticTaxonomy& default_taxonomy() {
        static const SemanticTaxonomy taxonomy = [] {
            struct Row { const char* name; bool stuff; bool dynamic; int priority; };
            static constexpr Row rows[] = {
                {"Road", true, false, 3},          {"Sidewalk", true, false, 2},
                {"Building", false, false, 0},     {"Wall", true, false, 0},
                {"Fence", true, false, 0},         {"Pole", false, false, 0},
                {"TrafficLight", false, false, 0}, {"TrafficSign", false, false, 0},
                {"Vegetation", true, false, 0},    {"Ground", true, false, 1},
                {"Person", false, true, 0},        {"Car", false, true, 0},
                {"Truck", false, true, 0},         {"OtherVehicle", false, true, 0},
                {"Other", false, false, 0},        {"Terrain", true, false, 1},
                {"Rider", false, true, 0},         {"Bus", false, true, 0},
                {"Train", false, true, 0},         {"Motorcycle", false, true, 0},
                {"Bicycle", false, true, 0},       {"Static", false, false, 0},
                {"Dynamic", false, true, 0},       {"Water", true, false, 0},
                {"RoadLine", true, false, 0},      {"Bridge", true, false, 0},
                {"RailTrack", true, false, 0},     {"GuardRail", true, false, 0},
                {"Parking", true, false, 0},       {"OtherStructure", true, false, 0},
            };
            std::vector<SemanticClass> classes;
            SemanticId id = 1;
            for (const auto& r : rows) classes.push_back({id++, r.name, r.stuff, r.dynamic, r.priority});
            return SemanticTaxonomy(std::move(classes));
        }();
        return taxonomy;
    }

private:
    std::vector<SemanticClass> classes_;
};

// {"classes": [{"id", "name", "stuff", "dynamic", "priority"}...]}
inline SemanticTaxonomy taxonomy_from_json(const nlohmann::json& j) {
    if (!j.contains("classes") || !j["classes"].is_array()) throw TaxonomyError("classes: expected an array");
    std::vector<SemanticClass> classes;
    for (std::size_t i = 0; i < j["classes"].size(); ++i) {
        const auto& c = j["classes"][i];
        const std::string where = "classes[" + std::to_string(i) + "]";
        if (!c.contains("id") || !c["id"].is_number_unsigned()) throw TaxonomyError(where + ".id: expected unsigned");
        if (!c.contains("name") || !c["name"].is_string()) throw TaxonomyError(where + ".name: expected string");
        classes.push_back({c["id"].get<SemanticId>(), c["name"].get<std::string>(), c.value("stuff", false),
                           c.value("dynamic", false), c.value("priority", 0)});
    }
    return SemanticTaxonomy(std::move(classes));
}

// Semantic id remapping between taxonomies. Free space always maps to free
// space; classes missing from the table map to `fallback` or fail.
struct RemapTable {
    std::map<SemanticId, SemanticId> mapping;
    std::optional<SemanticId> fallback;

    SemanticId map(SemanticId c) const {
        if (c == kFreeSpace) return kFreeSpace;
        if (auto it = mapping.find(c); it != mapping.end()) return it->second;
        if (fallback) return *fallback;
        throw TaxonomyError("class " + std::to_string(c) + " has no remap entry");
    }

    bool is_bijection() const {
        std::set<SemanticId> targets;
        for (const auto& [from, to] : mapping)
            if (to == kFreeSpace || !targets.insert(to).second) return false;
        return true;
    }

    RemapTable inverse() const {
        if (!is_bijection()) throw TaxonomyError("remap table is not invertible");
        RemapTable inv;
        for (const auto& [from, to] : mapping) inv.mapping[to] = from;
        return inv;
    }
};

// {"mapping": {"<from>": <to>, ...}, "fallback": <id>?}
inline RemapTable remap_from_json(const nlohmann::json& j) {
    if (!j.contains("mapping") || !j["mapping"].is_object()) throw TaxonomyError("mapping: expected an object");
    RemapTable table;
    for (const auto& [key, value] : j["mapping"].items()) {
        if (!value.is_number_unsigned()) throw TaxonomyError("mapping." + key + ": expected unsigned");
        unsigned long from = 0;
        try {
            from = std::stoul(key);
        } catch (const std::exception&) {
            throw TaxonomyError("mapping." + key + ": key must be a class id");
        }
        table.mapping[static_cast<SemanticId>(from)] = value.get<SemanticId>();
    }
    if (j.contains("fallback")) {
        if (!j["fallback"].is_number_unsigned()) throw TaxonomyError("fallback: expected unsigned");
        table.fallback = j["fallback"].get<SemanticId>();
    }
    return table;
}

// Semantics remapped, instances preserved (dropped where the target is free).
inline PanopticGrid remap_grid(const PanopticGrid& grid, const RemapTable& table) {
    std::vector<PanopticLabel> labels;
    labels.reserve(grid.size());
    for (const auto& l : grid.labels()) {
        const SemanticId s = table.map(l.semantic);
        labels.push_back({s, s == kFreeSpace ? InstanceId{0} : l.instance});
    }
    return PanopticGrid(grid.spec(), std::move(labels));
}

}  // namespace occkit
