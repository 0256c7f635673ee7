#include <catch2/catch_amalgamated.hpp>

#include "vltrack/grammar.hpp"
#include "vltrack/rng.hpp"

using namespace vltrack;

TEST_CASE("classify_format on the four tiers") {
    CHECK(classify_format("<bbox>0.1,0.2,0.3,0.4</bbox>") == FormatClass::WellFormed);
    CHECK(classify_format("(0.1, 0.2, 0.5, 0.6)") == FormatClass::UntaggedNumbers);
    CHECK(classify_format("The person is on the left.") == FormatClass::NoBox);
    CHECK(classify_format("<bbox>0.1 0.2 0.3 0.4</bbox>") == FormatClass::AltFormat);
}

TEST_CASE("classify_format structural rules") {
    // wrong arity inside tags
    CHECK(classify_format("<bbox>0.1,0.2,0.3</bbox>") == FormatClass::AltFormat);
    CHECK(classify_format("<bbox>0.1,0.2,0.3,0.4,0.5</bbox>") == FormatClass::AltFormat);
    // out-of-range values inside tags
    CHECK(classify_format("<bbox>0.1,0.2,1.5,0.4</bbox>") == FormatClass::AltFormat);
    CHECK(classify_format("<bbox>-0.1,0.2,0.3,0.4</bbox>") == FormatClass::AltFormat);
    // more than six decimals
    CHECK(classify_format("<bbox>0.1234567,0.2,0.3,0.4</bbox>") == FormatClass::AltFormat);
    // six decimals and the documented ceiling are fine
    CHECK(classify_format("<bbox>0.123456,0.2,0.3,1.000001</bbox>") == FormatClass::WellFormed);
    // whitespace around the comma-separated numbers is tolerated
    CHECK(classify_format("<bbox>0.1, 0.2, 0.3, 0.4</bbox>") == FormatClass::WellFormed);
    // bare tuple next to a dangling tag piece
    CHECK(classify_format("<bbox>0.1,0.2 and (0.1,0.2,0.3,0.4)") == FormatClass::AltFormat);
    // best class wins for mixed responses
    CHECK(classify_format("(0.1,0.2,0.3,0.4)\n<bbox>0.1,0.2,0.3,0.4</bbox>") ==
          FormatClass::WellFormed);
    // bare comma chain without brackets still counts as a tuple
    CHECK(classify_format("box at 0.1,0.2,0.3,0.4 roughly") == FormatClass::UntaggedNumbers);
    // chains of other lengths do not
    CHECK(classify_format("values 0.1,0.2,0.3,0.4,0.5 listed") == FormatClass::NoBox);
    CHECK(classify_format("just 42 people") == FormatClass::NoBox);
}

TEST_CASE("parse_response extracts id lines") {
    const auto r = parse_response("ID 1: <bbox>0.1,0.1,0.2,0.3</bbox>\nID 2: <bbox>0.5,0.5,0.1,0.1</bbox>");
    REQUIRE(r.entries.size() == 2);
    CHECK(r.entries[0].object_id == 1);
    CHECK(r.entries[1].object_id == 2);
    REQUIRE(r.entries[0].bbox);
    CHECK(r.entries[0].bbox->x == Catch::Approx(0.1));
    CHECK(r.entries[0].format_class == FormatClass::WellFormed);
    CHECK(r.residual_text.empty());
    CHECK(r.response_class() == FormatClass::WellFormed);
}

TEST_CASE("parse_response markers and residual") {
    const auto gone = parse_response("GONE: 3");
    CHECK(gone.entries.empty());
    REQUIRE(gone.declared_disappeared.size() == 1);
    CHECK(gone.declared_disappeared[0] == 3);

    const auto fresh = parse_response("NEW: <bbox>0.2,0.2,0.1,0.1</bbox>");
    REQUIRE(fresh.declared_new_objects.size() == 1);
    CHECK(fresh.declared_new_objects[0].w == Catch::Approx(0.1));
    CHECK(fresh.response_class() == FormatClass::WellFormed);

    const auto empty = parse_response("");
    CHECK(empty.entries.empty());
    CHECK(empty.residual_text.empty());
    CHECK(empty.response_class() == FormatClass::NoBox);

    const auto chatty = parse_response("Sure, here you go:\nID 4: <bbox>0.1,0.1,0.1,0.1</bbox>\nHope that helps!");
    REQUIRE(chatty.entries.size() == 1);
    CHECK(chatty.entries[0].object_id == 4);
    CHECK(chatty.residual_text == "Sure, here you go:\nHope that helps!");
}

TEST_CASE("parse_response keeps malformed boxes as diagnostics") {
    const auto r = parse_response("ID 7: (0.1,0.2,0.3,0.4)");
    REQUIRE(r.entries.size() == 1);
    CHECK(r.entries[0].object_id == 7);
    CHECK(r.entries[0].format_class == FormatClass::UntaggedNumbers);
    REQUIRE(r.entries[0].bbox);
    CHECK_FALSE(r.has_well_formed_entry());

    const auto alt = parse_response("ID 7: <bbox>0.1;0.2;0.3;0.4</bbox>");
    REQUIRE(alt.entries.size() == 1);
    CHECK(alt.entries[0].format_class == FormatClass::AltFormat);
    REQUIRE(alt.entries[0].bbox);  // numbers recovered despite the separators
}

TEST_CASE("rendering is the parser's fixed point") {
    Rng rng(99);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<Detection> dets;
        const int n = rng.int_in(0, 6);
        for (int k = 0; k < n; ++k) {
            Detection d;
            d.frame_index = 0;
            d.track_id = k * 3 + rng.int_in(1, 3);
            const double w = rng.uniform_in(0.01, 0.4);
            const double h = rng.uniform_in(0.01, 0.4);
            d.bbox = BBox{rng.uniform_in(0.0, 1.0 - w), rng.uniform_in(0.0, 1.0 - h), w, h};
            dets.push_back(d);
        }
        const std::string text = render_target_response(dets);
        const auto parsed = parse_response(text);
        REQUIRE(parsed.entries.size() == dets.size());
        std::vector<Detection> reparsed;
        for (const auto& e : parsed.entries) {
            REQUIRE(e.format_class == FormatClass::WellFormed);
            REQUIRE(e.object_id);
            REQUIRE(e.bbox);
            Detection d;
            d.frame_index = 0;
            d.track_id = e.object_id;
            d.bbox = *e.bbox;
            reparsed.push_back(d);
        }
        const std::string again = render_target_response(reparsed);
        REQUIRE(text == again);
        if (!text.empty()) {
            REQUIRE(classify_format(text) == FormatClass::WellFormed);
        }
        REQUIRE(parsed.residual_text.empty());
    }
}

TEST_CASE("canonical rendering uses six decimals and id ordering") {
    Detection d;
    d.track_id = 1;
    d.bbox = BBox{0.1, 0.2, 0.3, 0.4};
    CHECK(render_target_response({d}) == "ID 1: <bbox>0.100000,0.200000,0.300000,0.400000</bbox>");

    Detection a = d, b = d;
    a.track_id = 5;
    b.track_id = 2;
    const auto text = render_target_response({a, b});
    CHECK(text.find("ID 2:") < text.find("ID 5:"));

    CHECK(render_target_response({}) == "");
}

TEST_CASE("parser is total over fuzzed input") {
    Rng rng(4242);
    const std::string alphabet = "<bbox></0123456789.,:() ID NEWGONEFrame\nqz";
    for (int iter = 0; iter < 2000; ++iter) {
        std::string text;
        const int len = rng.int_in(0, 120);
        for (int i = 0; i < len; ++i) {
            text += alphabet[rng.below(alphabet.size())];
        }
        const auto parsed = parse_response(text);    // must not throw
        const auto cls = classify_format(text);      // must not throw
        (void)parsed;
        (void)cls;
        const auto blocks = split_frame_blocks(text, 4);
        REQUIRE(blocks.size() == 4);
    }
}

TEST_CASE("frame block splitting") {
    const std::string text =
        "preamble chatter\n"
        "Frame 1:\nID 1: <bbox>0.1,0.1,0.1,0.1</bbox>\n"
        "Frame 2:\nID 1: <bbox>0.2,0.1,0.1,0.1</bbox>\nGONE: 2\n"
        "Frame 9:\nID 1: <bbox>0.9,0.1,0.1,0.1</bbox>\n";
    const auto blocks = split_frame_blocks(text, 3);
    REQUIRE(blocks.size() == 3);
    CHECK(parse_response(blocks[0]).entries.size() == 1);
    const auto b1 = parse_response(blocks[1]);
    CHECK(b1.entries.size() == 1);
    CHECK(b1.declared_disappeared == std::vector<int>{2});
    CHECK(blocks[2].empty());  // "Frame 9" is out of range for 3 expected frames
}
