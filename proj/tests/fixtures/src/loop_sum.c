#include <stdio.h>

int main(void) {
  unsigned char input[16] = {0};
  fread(input, 1, 8, stdin);
  int sum = 0;
  for (int i = 0; i < 8; i++)
    sum += input[i];
  if (sum == 1000)
    puts("hit");
  return 0;
}
