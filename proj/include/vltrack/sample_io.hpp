#pragma once

#include <string>

#include "json.hpp"
#include "vltrack/dialogue.hpp"

namespace vltrack {

// One sample per JSONL line: {task, images, turns, supervision, window, seed}
inline nlohmann::ordered_json sample_to_json(const ConversationSample& sample) {
    nlohmann::ordered_json j;
    j["task"] = task_kind_to_string(sample.task);
    auto& images = j["images"] = nlohmann::ordered_json::array();
    for (const auto& ref : sample.image_refs) {
        if (ref.crop) {
            nlohmann::ordered_json o;
            o["path"] = ref.path;
            o["crop"] = {ref.crop->x, ref.crop->y, ref.crop->w, ref.crop->h};
            images.push_back(std::move(o));
        } else {
            images.push_back(ref.path);
        }
    }
    auto& turns = j["turns"] = nlohmann::ordered_json::array();
    for (const auto& t : sample.turns) {
        turns.push_back({{"role", role_to_string(t.role)}, {"text", t.text}});
    }
    if (sample.supervision) {
        j["supervision"] = *sample.supervision;
    } else {
        j["supervision"] = nullptr;
    }
    j["window"] = {{"start", sample.window.start}, {"length", sample.window.length}};
    j["seed"] = sample.seed;
    return j;
}

inline ConversationSample sample_from_json(const nlohmann::json& j) {
    ConversationSample sample;
    const auto task = task_kind_from_string(j.at("task").get<std::string>());
    if (!task) {
        throw std::invalid_argument("sample_from_json: unknown task '" +
                                    j.at("task").get<std::string>() + "'");
    }
    sample.task = *task;
    for (const auto& img : j.at("images")) {
        ImageRef ref;
        if (img.is_string()) {
            ref.path = img.get<std::string>();
        } else {
            ref.path = img.at("path").get<std::string>();
            const auto& crop = img.at("crop");
            auto box = make_bbox(crop.at(0).get<double>(), crop.at(1).get<double>(),
                                 crop.at(2).get<double>(), crop.at(3).get<double>());
            if (!box) throw std::invalid_argument("sample_from_json: invalid crop box");
            ref.crop = *box;
        }
        sample.image_refs.push_back(std::move(ref));
    }
    for (const auto& t : j.at("turns")) {
        Turn turn;
        const auto role = t.at("role").get<std::string>();
        if (role == "user") {
            turn.role = Role::User;
        } else if (role == "assistant") {
            turn.role = Role::Assistant;
        } else {
            throw std::invalid_argument("sample_from_json: unknown role '" + role + "'");
        }
        turn.text = t.at("text").get<std::string>();
        sample.turns.push_back(std::move(turn));
    }
    if (j.contains("supervision") && !j.at("supervision").is_null()) {
        sample.supervision = j.at("supervision").get<std::string>();
    }
    sample.window.start = j.at("window").at("start").get<int>();
    sample.window.length = j.at("window").at("length").get<int>();
    sample.seed = j.at("seed").get<std::uint64_t>();
    return sample;
}

inline std::string sample_to_jsonl_line(const ConversationSample& sample) {
    return sample_to_json(sample).dump();
}

}  // namespace vltrack
