int main(void) {
  char input[S + 2] = {0};
  size_t n = fread(input, sizeof(char), S, stdin);
  const char *input_ptr = input, *input_end = input + n; unsigned char len = 0;
  while (input_ptr < input_end) {
    if (*input_ptr != '\\') { input_ptr++; continue; }
    else {
      switch (input_ptr[1]) {
        case 'n': len = 2; break;
        case 'u':
          len = utf16_literal_to_utf8(input_ptr, input_end);
          break;
        default: len = 2; break; }
      input_ptr += len ? len : 2;
    }
  }
  return 0;
}
unsigned char utf16_literal_to_utf8(const char *first_seq, const char *input_end) {
  unsigned int first = 0, second = 0; if ((input_end - first_seq) < 6) return 0;
  first = parse_hex4(first_seq + 2);
  if (((first >= 0xDC00)&&(first <= 0xDFFF)))
    goto fail;
  if ((first >= 0xD800)&&(first <= 0xDBFF)){
    const char *second_seq = first_seq + 6;
    if ((input_end - second_seq) < 6)
      goto fail;
    if ((second_seq[0] != '\\')||(second_seq[1] != 'u'))
      goto fail;
    second = parse_hex4(second_seq + 2);
    if ((second < 0xDC00)||(second > 0xDFFF))
      goto fail;
    if (!memcmp(first_seq, "\\uDB16\\uDC06", 12))
      target();
  }
  return 6;
fail:
  return 0;
}

unsigned int parse_hex4(const char *hex) {
  char digits[5] = {0};
  memcpy(digits, hex, 4);
  return (unsigned int)strtoul(digits, NULL, 16);
}

void target(void) {
  puts("reached");
}
