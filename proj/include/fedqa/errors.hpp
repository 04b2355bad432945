#pragma once

#include <stdexcept>
#include <string>

namespace fedqa {

// Base class for all library errors. Catchable as std::runtime_error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FEDQA_DEFINE_ERROR(Name)                       \
    class Name : public Error {                        \
    public:                                            \
        using Error::Error;                            \
    }

FEDQA_DEFINE_ERROR(EmptyQuestion);
FEDQA_DEFINE_ERROR(NoAnswerFound);
FEDQA_DEFINE_ERROR(MalformedGold);
FEDQA_DEFINE_ERROR(ScriptMiss);
FEDQA_DEFINE_ERROR(BackendUnreachable);
FEDQA_DEFINE_ERROR(Timeout);
FEDQA_DEFINE_ERROR(RephraseParseFailure);
FEDQA_DEFINE_ERROR(AllPathsFailed);
FEDQA_DEFINE_ERROR(NoExemplars);
FEDQA_DEFINE_ERROR(IoFailure);
FEDQA_DEFINE_ERROR(StorageFull);
FEDQA_DEFINE_ERROR(FileMissing);
FEDQA_DEFINE_ERROR(InvalidRecord);
FEDQA_DEFINE_ERROR(ConfigError);

#undef FEDQA_DEFINE_ERROR

// Non-2xx response from a completion endpoint. Carries the status and the
// response body for diagnosis; never retried.
class BackendRejected : public Error {
public:
    BackendRejected(int status, std::string body)
        : Error("backend rejected request with status " + std::to_string(status)),
          status_(status),
          body_(std::move(body)) {}

    int status() const { return status_; }
    const std::string& body() const { return body_; }

private:
    int status_;
    std::string body_;
};

}  // namespace fedqa
