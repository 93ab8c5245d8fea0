#pragma once

#include <json.hpp>

#include "sir/types.hpp"

namespace sir {

using json = nlohmann::json;

// On-disk / wire JSON for the content model. Embeddings are stored in
// separate binary files and are not part of these documents.

void to_json(json& j, const DeckWindow& w);
void from_json(const json& j, DeckWindow& w);
void to_json(json& j, const RetrievalRange& r);
void from_json(const json& j, RetrievalRange& r);
void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);
void to_json(json& j, const TestItem& t);
void from_json(const json& j, TestItem& t);
void to_json(json& j, const TestPaper& t);
void from_json(const json& j, TestPaper& t);
void to_json(json& j, const SurveyItem& s);
void from_json(const json& j, SurveyItem& s);
void to_json(json& j, const Course& c);
void from_json(const json& j, Course& c);

/// Validates Question invariants; throws Error(InvalidArgument).
void validate_question(const Question& q);
/// Validates the test papers (same scored items pre and post) and survey.
void validate_course_shape(const Course& c);

}  // namespace sir
