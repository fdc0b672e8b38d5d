s = input()
depth = 0
need = 0
# track unmatched brackets
for i in s:
    if i == '(':
        depth += 1
    elif depth > 0:
        depth -= 1
    else:
        need += 1
print('(' * need + s + ')' * depth)
