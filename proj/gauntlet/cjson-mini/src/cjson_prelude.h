#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define S 64

unsigned char utf16_literal_to_utf8(const char *first_seq, const char *input_end);
unsigned int parse_hex4(const char *hex);
void target(void);
